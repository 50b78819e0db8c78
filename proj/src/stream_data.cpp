#include "paofed/stream_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>

#include "paofed/random.hpp"

namespace paofed {

double synth_target(std::span<const double> x, double noise) {
    if (x.size() != 4)
        throw std::invalid_argument("synthetic target expects a 4-dimensional input");
    const double s = std::sin(std::numbers::pi * x[3]);
    return std::sqrt(x[0] * x[0] + s * s) +
           (0.8 - 0.5 * std::exp(-x[1] * x[1]) * x[2]) + noise;
}

int StreamPlan::data_group(int client) const {
    if (client < 0 || client >= client_count())
        throw std::out_of_range("client id out of range");
    const int per_group = client_count() / static_cast<int>(group_sizes.size());
    return std::min(client / per_group, static_cast<int>(group_sizes.size()) - 1);
}

std::size_t StreamPlan::total_samples() const {
    std::size_t n = 0;
    for (const auto& c : clients) n += c.size();
    return n;
}

std::string StreamPlan::dump() const {
    std::ostringstream out;
    out.precision(17);
    out << "# clients " << client_count() << " horizon " << horizon << " groups";
    for (int g : group_sizes) out << ' ' << g;
    out << '\n';
    for (const auto& events : clients)
        for (const auto& e : events) {
            out << e.client_id << ' ' << e.iteration << ' ' << e.target;
            for (double v : e.input) out << ' ' << v;
            out << '\n';
        }
    return out.str();
}

std::vector<int> arrival_iterations(int count, int horizon) {
    if (count < 0 || count > horizon)
        throw std::invalid_argument("sample count must lie in [0, horizon]");
    std::vector<int> it(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        it[static_cast<std::size_t>(i)] = static_cast<int>(
            static_cast<std::int64_t>(i) * horizon / count);
    return it;
}

namespace {

double default_target(const Eigen::VectorXd& x, double noise) {
    return synth_target(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                        noise);
}

void validate(const StreamConfig& c) {
    if (c.clients < 1) throw std::invalid_argument("need at least one client");
    if (c.group_sizes.empty()) throw std::invalid_argument("need at least one data group");
    if (c.clients % static_cast<int>(c.group_sizes.size()) != 0)
        throw std::invalid_argument("client count must be divisible by the number of data groups");
    if (c.horizon < 1) throw std::invalid_argument("horizon must be positive");
    if (c.input_dim < 1) throw std::invalid_argument("input dimension must be positive");
    if (c.noise_variance < 0.0) throw std::invalid_argument("noise variance must be non-negative");
    if (!(c.input_low < c.input_high)) throw std::invalid_argument("empty input range");
    for (int s : c.group_sizes)
        if (s < 0 || s > c.horizon)
            throw std::invalid_argument("group size must lie in [0, horizon]");
}

}  // namespace

StreamPlan build_stream_plan(const StreamConfig& config, std::uint64_t seed,
                             const TargetFunction& target) {
    validate(config);
    const TargetFunction& f = target ? target : TargetFunction(default_target);
    const int groups = static_cast<int>(config.group_sizes.size());
    const int per_group = config.clients / groups;

    StreamPlan plan;
    plan.group_sizes = config.group_sizes;
    plan.horizon = config.horizon;
    plan.clients.resize(static_cast<std::size_t>(config.clients));

    std::uniform_real_distribution<double> input(config.input_low, config.input_high);
    std::normal_distribution<double> noise(0.0, std::sqrt(config.noise_variance));
    for (int k = 0; k < config.clients; ++k) {
        Rng rng = make_stream(seed, "data", static_cast<std::uint64_t>(k));
        const int count = config.group_sizes[static_cast<std::size_t>(k / per_group)];
        auto& events = plan.clients[static_cast<std::size_t>(k)];
        events.reserve(static_cast<std::size_t>(count));
        for (int n : arrival_iterations(count, config.horizon)) {
            SampleEvent e;
            e.client_id = k;
            e.iteration = n;
            e.input.resize(config.input_dim);
            for (int j = 0; j < config.input_dim; ++j) e.input(j) = input(rng);
            const double eta = config.noise_variance > 0.0 ? noise(rng) : 0.0;
            e.target = f(e.input, eta);
            events.push_back(std::move(e));
        }
    }
    return plan;
}

TestSet make_test_set(const FeatureMap& fm, Eigen::MatrixXd inputs,
                      Eigen::VectorXd targets) {
    if (inputs.rows() < 1) throw std::invalid_argument("test set must not be empty");
    if (inputs.rows() != targets.size())
        throw std::invalid_argument("test inputs and targets differ in length");
    TestSet t;
    t.mapped = fm.map_rows(inputs);
    t.inputs = std::move(inputs);
    t.targets = std::move(targets);
    return t;
}

TestSet build_test_set(const FeatureMap& fm, const StreamConfig& config,
                       int size, std::uint64_t seed, const TargetFunction& target) {
    if (size < 1) throw std::invalid_argument("test set size must be positive");
    if (config.input_dim != fm.dim_in())
        throw std::invalid_argument("test input dimension does not match feature map");
    const TargetFunction& f = target ? target : TargetFunction(default_target);
    Rng rng = make_stream(seed, "test");
    std::uniform_real_distribution<double> input(config.input_low, config.input_high);
    Eigen::MatrixXd x(size, config.input_dim);
    Eigen::VectorXd y(size);
    for (int i = 0; i < size; ++i) {
        for (int j = 0; j < config.input_dim; ++j) x(i, j) = input(rng);
        y(i) = f(x.row(i).transpose(), 0.0);
    }
    return make_test_set(fm, std::move(x), std::move(y));
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t i = 0;
    if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
        row.clear();
    };

    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started && !field.empty())
                    throw DataError(DataError::Kind::malformed, "stray quote inside CSV field");
                quoted = true;
                field_started = true;
                break;
            case ',': end_field(); break;
            case '\r': break;
            case '\n': end_row(); break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (quoted) throw DataError(DataError::Kind::malformed, "unterminated quoted CSV field");
    if (field_started || !row.empty()) end_row();
    return rows;
}

namespace {

std::optional<double> parse_number(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        return std::nullopt;
    return v;
}

// Largest-remainder split of `total` items over weights.
std::vector<int> apportion(int total, const std::vector<double>& weights) {
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<int> out(weights.size());
    std::vector<std::pair<double, std::size_t>> rem;
    int assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double exact = total * weights[i] / sum;
        out[i] = static_cast<int>(std::floor(exact));
        assigned += out[i];
        rem.emplace_back(exact - out[i], i);
    }
    std::stable_sort(rem.begin(), rem.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < total; ++r, ++assigned) ++out[rem[r].second];
    return out;
}

}  // namespace

CsvDataset load_csv_stream(const CsvStreamOptions& options, std::uint64_t seed) {
    if (options.feature_columns.empty())
        throw std::invalid_argument("at least one feature column required");
    if (!(options.test_fraction >= 0.0 && options.test_fraction < 1.0))
        throw std::invalid_argument("test fraction must lie in [0, 1)");
    if (options.clients < 1 || options.group_weights.empty() ||
        options.clients % static_cast<int>(options.group_weights.size()) != 0)
        throw std::invalid_argument("client count must be divisible by the number of data groups");

    std::ifstream in(options.path, std::ios::binary);
    if (!in) throw DataError(DataError::Kind::file_not_found, "cannot open " + options.path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const auto table = parse_csv(buf.str());
    if (table.empty()) throw DataError(DataError::Kind::no_usable_rows, "CSV has no header");

    const auto& header = table.front();
    auto column = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw DataError(DataError::Kind::missing_column, "missing column: " + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    std::vector<std::size_t> cols;
    for (const auto& name : options.feature_columns) cols.push_back(column(name));
    const std::size_t target_col = column(options.target_column);

    const int dim = static_cast<int>(cols.size());
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> ys;
    std::size_t dropped = 0;
    for (std::size_t r = 1; r < table.size(); ++r) {
        const auto& row = table[r];
        Eigen::VectorXd x(dim);
        bool ok = row.size() == header.size();
        for (int j = 0; ok && j < dim; ++j) {
            auto v = parse_number(row[cols[static_cast<std::size_t>(j)]]);
            if (v) x(j) = *v; else ok = false;
        }
        std::optional<double> y = ok ? parse_number(row[target_col]) : std::nullopt;
        if (!y) { ++dropped; continue; }
        xs.push_back(std::move(x));
        ys.push_back(*y);
    }
    if (xs.empty()) throw DataError(DataError::Kind::no_usable_rows, "no usable rows in " + options.path);

    if (options.normalization != Normalization::none) {
        for (int j = 0; j < dim; ++j) {
            double lo = xs[0](j), hi = xs[0](j), mean = 0.0;
            for (const auto& x : xs) {
                lo = std::min(lo, x(j));
                hi = std::max(hi, x(j));
                mean += x(j);
            }
            mean /= static_cast<double>(xs.size());
            double var = 0.0;
            for (const auto& x : xs) var += (x(j) - mean) * (x(j) - mean);
            const double sd = std::sqrt(var / static_cast<double>(xs.size()));
            for (auto& x : xs) {
                if (options.normalization == Normalization::min_max)
                    x(j) = hi > lo ? 2.0 * (x(j) - lo) / (hi - lo) - 1.0 : 0.0;
                else
                    x(j) = sd > 0.0 ? (x(j) - mean) / sd : 0.0;
            }
        }
    }

    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_stream(seed, "csv_shuffle");
    std::shuffle(order.begin(), order.end(), rng);

    const int total = static_cast<int>(xs.size());
    const int test_rows = static_cast<int>(std::lround(options.test_fraction * total));
    const int stream_rows = total - test_rows;

    CsvDataset out;
    out.dropped_rows = dropped;
    out.test_inputs.resize(test_rows, dim);
    out.test_targets.resize(test_rows);
    for (int i = 0; i < test_rows; ++i) {
        const std::size_t src = order[static_cast<std::size_t>(stream_rows + i)];
        out.test_inputs.row(i) = xs[src].transpose();
        out.test_targets(i) = ys[src];
    }

    const int groups = static_cast<int>(options.group_weights.size());
    const int per_group = options.clients / groups;
    std::vector<double> weights;
    for (int k = 0; k < options.clients; ++k)
        weights.push_back(options.group_weights[static_cast<std::size_t>(k / per_group)]);
    const std::vector<int> quota = apportion(stream_rows, weights);
    const int horizon = std::max(1, *std::max_element(quota.begin(), quota.end()));

    out.plan.horizon = horizon;
    out.plan.group_sizes.resize(static_cast<std::size_t>(groups));
    for (int g = 0; g < groups; ++g)
        out.plan.group_sizes[static_cast<std::size_t>(g)] = quota[static_cast<std::size_t>(g * per_group)];
    out.plan.clients.resize(static_cast<std::size_t>(options.clients));
    std::size_t next = 0;
    for (int k = 0; k < options.clients; ++k) {
        auto& events = out.plan.clients[static_cast<std::size_t>(k)];
        for (int n : arrival_iterations(quota[static_cast<std::size_t>(k)], horizon)) {
            const std::size_t src = order[next++];
            events.push_back(SampleEvent{k, n, xs[src], ys[src]});
        }
    }
    return out;
}

}  // namespace paofed
