#include "paofed/experiment_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace paofed {

namespace pt = boost::property_tree;

namespace {

std::string join_problems(const std::vector<std::string>& p) {
    std::string s = "invalid configuration:";
    for (const auto& x : p) s += "\n  - " + x;
    return s;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    if (boost::algorithm::trim_copy(text).empty()) return parts;
    boost::algorithm::split(parts, text, boost::is_any_of(","));
    for (auto& p : parts) boost::algorithm::trim(p);
    return parts;
}

template <class T>
T parse_value(const std::string& key, const std::string& text) {
    std::istringstream in(text);
    T v{};
    in >> v;
    if (in.fail() || !(in >> std::ws).eof())
        throw ConfigError({"cannot parse '" + text + "' for key " + key});
    return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
    std::vector<T> out;
    for (const auto& p : split_list(text)) out.push_back(parse_value<T>(key, p));
    return out;
}

bool parse_bool(const std::string& key, std::string text) {
    boost::algorithm::to_lower(text);
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError({"cannot parse '" + text + "' as a boolean for key " + key});
}

template <class T>
void read(const pt::ptree& tree, const std::string& key, T& target) {
    if (auto v = tree.get_optional<std::string>(key)) target = parse_value<T>(key, *v);
}

void read_string(const pt::ptree& tree, const std::string& key, std::string& target) {
    if (auto v = tree.get_optional<std::string>(key)) target = boost::algorithm::trim_copy(*v);
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

template <class T>
std::string join(const std::vector<T>& values) {
    std::ostringstream out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out << ",";
        if constexpr (std::is_floating_point_v<T>)
            out << format_double(values[i]);
        else
            out << values[i];
    }
    return out.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

const std::vector<std::string>& known_algorithms() {
    static const std::vector<std::string> ids{"pao-c0", "pao-c1", "pao-c2", "pao-u0",
                                              "pao-u1", "pao-u2", "online-fed", "online-fedsgd",
                                              "pso-fed"};
    return ids;
}

bool is_known_algorithm(std::string_view id) {
    const auto& ids = known_algorithms();
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

double default_step_size(std::string_view /*algorithm*/) { return 0.4; }

double ExperimentConfig::step_size(const std::string& algorithm) const {
    const auto it = learning_rates.find(algorithm);
    return it == learning_rates.end() ? default_step_size(algorithm) : it->second;
}

int ExperimentConfig::effective_subset_size() const {
    if (subset_size > 0) return subset_size;
    if (rff_dim <= 0) return 1;
    const long long num = static_cast<long long>(clients) * mask_size;
    return static_cast<int>(std::max(1LL, (num + rff_dim - 1) / rff_dim));
}

void ExperimentConfig::validate() const {
    std::vector<std::string> p;
    auto check = [&](bool ok, std::string what) {
        if (!ok) p.push_back(std::move(what));
    };
    check(monte_carlo >= 1, "experiment.monte_carlo must be >= 1");
    check(threads >= 1, "experiment.threads must be >= 1");
    check(horizon >= 1, "experiment.horizon must be >= 1");
    check(test_size >= 1, "experiment.test_size must be >= 1");
    check(!algorithms.empty(), "experiment.algorithms must not be empty");
    for (const auto& a : algorithms) check(is_known_algorithm(a), "unknown algorithm '" + a + "'");
    check(!output_dir.empty(), "experiment.output_dir must not be empty");

    check(clients >= 1, "model.clients must be >= 1");
    check(rff_dim >= 1, "model.rff_dim must be >= 1");
    check(input_dim >= 1, "model.input_dim must be >= 1");
    check(mask_size >= 1 && mask_size <= rff_dim, "model.mask_size must lie in [1, rff_dim]");
    check(kernel_width >= 0.0 && std::isfinite(kernel_width),
          "model.kernel_width must be >= 0 (0 selects the median heuristic)");

    check(!group_sizes.empty(), "data.group_sizes must not be empty");
    for (int g : group_sizes) check(g >= 0, "data.group_sizes entries must be >= 0");
    for (int g : group_sizes)
        check(g <= horizon, "data.group_sizes entries must not exceed the horizon");
    check(!group_sizes.empty() && clients % static_cast<int>(group_sizes.size()) == 0,
          "model.clients must be a multiple of the number of data groups");
    check(noise_variance >= 0.0, "data.noise_variance must be >= 0");
    check(source == "synthetic" || source == "csv", "data.source must be 'synthetic' or 'csv'");
    if (source == "csv") {
        check(!csv_path.empty(), "data.csv_path is required for csv sources");
        check(!csv_target.empty(), "data.csv_target is required for csv sources");
        check(static_cast<int>(csv_features.size()) == input_dim,
              "data.csv_features must list model.input_dim columns");
        check(csv_normalization == "none" || csv_normalization == "min-max" ||
                  csv_normalization == "z-score",
              "data.csv_normalization must be none, min-max or z-score");
        check(csv_test_fraction > 0.0 && csv_test_fraction < 1.0,
              "data.csv_test_fraction must lie in (0, 1)");
    }

    check(!availability.empty(), "environment.availability must not be empty");
    for (double a : availability)
        check(a >= 0.0 && a <= 1.0, "environment.availability entries must lie in [0, 1]");
    if (!group_sizes.empty() && !availability.empty() && clients % static_cast<int>(group_sizes.size()) == 0)
        check(clients / static_cast<int>(group_sizes.size()) >= static_cast<int>(availability.size()),
              "each data group needs at least one client per availability group");
    check(delay_tail >= 0.0 && delay_tail < 1.0, "environment.delay_tail must lie in [0, 1)");
    check(max_delay >= 0, "environment.max_delay must be >= 0");
    check(delay_step >= 1, "environment.delay_step must be >= 1");

    check(weight_base >= 0.0 && weight_base <= 1.0, "aggregation.weight_base must lie in [0, 1]");
    check(tie_rule == "keep-all" || tie_rule == "lowest-client",
          "aggregation.tie_rule must be keep-all or lowest-client");
    for (const auto& [id, mu] : learning_rates) {
        check(is_known_algorithm(id), "learning rate for unknown algorithm '" + id + "'");
        check(mu > 0.0 && std::isfinite(mu), "learning rate for '" + id + "' must be positive");
    }
    check(subset_size >= 0, "baselines.subset_size must be >= 0");
    check(pso_coordination == "coordinated" || pso_coordination == "uncoordinated",
          "baselines.pso_coordination must be coordinated or uncoordinated");
    if (!p.empty()) throw ConfigError(std::move(p));
}

ExperimentConfig parse_config(const std::string& ini_text) {
    pt::ptree tree;
    std::istringstream in(ini_text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError({std::string("malformed INI: ") + e.what()});
    }

    static const std::map<std::string, std::vector<std::string>> allowed{
        {"experiment", {"seed", "monte_carlo", "threads", "output_dir", "algorithms", "horizon", "test_size"}},
        {"model", {"clients", "rff_dim", "input_dim", "mask_size", "kernel_width", "feature_seed"}},
        {"data", {"group_sizes", "noise_variance", "source", "csv_path", "csv_features", "csv_target",
                  "csv_normalization", "csv_test_fraction"}},
        {"environment", {"availability", "delay_tail", "max_delay", "delay_step", "full_downlink"}},
        {"aggregation", {"weight_base", "tie_rule"}},
        {"learning_rates", {}},
        {"baselines", {"subset_size", "pso_coordination"}},
    };
    std::vector<std::string> unknown;
    for (const auto& [section, body] : tree) {
        const auto it = allowed.find(section);
        if (it == allowed.end()) {
            unknown.push_back("unknown section [" + section + "]");
            continue;
        }
        if (section == "learning_rates") continue;
        for (const auto& [key, value] : body)
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                unknown.push_back("unknown key " + section + "." + key);
    }
    if (!unknown.empty()) throw ConfigError(unknown);

    ExperimentConfig c;
    read(tree, "experiment.seed", c.seed);
    read(tree, "experiment.monte_carlo", c.monte_carlo);
    read(tree, "experiment.threads", c.threads);
    read_string(tree, "experiment.output_dir", c.output_dir);
    if (auto v = tree.get_optional<std::string>("experiment.algorithms")) c.algorithms = split_list(*v);
    read(tree, "experiment.horizon", c.horizon);
    read(tree, "experiment.test_size", c.test_size);

    read(tree, "model.clients", c.clients);
    read(tree, "model.rff_dim", c.rff_dim);
    read(tree, "model.input_dim", c.input_dim);
    read(tree, "model.mask_size", c.mask_size);
    read(tree, "model.kernel_width", c.kernel_width);
    read(tree, "model.feature_seed", c.feature_seed);

    if (auto v = tree.get_optional<std::string>("data.group_sizes"))
        c.group_sizes = parse_list<int>("data.group_sizes", *v);
    read(tree, "data.noise_variance", c.noise_variance);
    read_string(tree, "data.source", c.source);
    read_string(tree, "data.csv_path", c.csv_path);
    if (auto v = tree.get_optional<std::string>("data.csv_features")) c.csv_features = split_list(*v);
    read_string(tree, "data.csv_target", c.csv_target);
    read_string(tree, "data.csv_normalization", c.csv_normalization);
    read(tree, "data.csv_test_fraction", c.csv_test_fraction);

    if (auto v = tree.get_optional<std::string>("environment.availability"))
        c.availability = parse_list<double>("environment.availability", *v);
    read(tree, "environment.delay_tail", c.delay_tail);
    read(tree, "environment.max_delay", c.max_delay);
    read(tree, "environment.delay_step", c.delay_step);
    if (auto v = tree.get_optional<std::string>("environment.full_downlink"))
        c.full_downlink = parse_bool("environment.full_downlink", *v);

    read(tree, "aggregation.weight_base", c.weight_base);
    read_string(tree, "aggregation.tie_rule", c.tie_rule);

    if (auto lr = tree.get_child_optional("learning_rates"))
        for (const auto& [key, value] : *lr)
            c.learning_rates[key] = parse_value<double>("learning_rates." + key, value.data());

    read(tree, "baselines.subset_size", c.subset_size);
    read_string(tree, "baselines.pso_coordination", c.pso_coordination);
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file " + path});
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string to_ini(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "[experiment]\n"
      << "seed = " << c.seed << "\n"
      << "monte_carlo = " << c.monte_carlo << "\n"
      << "threads = " << c.threads << "\n"
      << "output_dir = " << c.output_dir << "\n"
      << "algorithms = " << join(c.algorithms) << "\n"
      << "horizon = " << c.horizon << "\n"
      << "test_size = " << c.test_size << "\n\n"
      << "[model]\n"
      << "clients = " << c.clients << "\n"
      << "rff_dim = " << c.rff_dim << "\n"
      << "input_dim = " << c.input_dim << "\n"
      << "mask_size = " << c.mask_size << "\n"
      << "kernel_width = " << format_double(c.kernel_width) << "\n"
      << "feature_seed = " << c.feature_seed << "\n\n"
      << "[data]\n"
      << "group_sizes = " << join(c.group_sizes) << "\n"
      << "noise_variance = " << format_double(c.noise_variance) << "\n"
      << "source = " << c.source << "\n";
    if (!c.csv_path.empty()) o << "csv_path = " << c.csv_path << "\n";
    if (!c.csv_features.empty()) o << "csv_features = " << join(c.csv_features) << "\n";
    if (!c.csv_target.empty()) o << "csv_target = " << c.csv_target << "\n";
    o << "csv_normalization = " << c.csv_normalization << "\n"
      << "csv_test_fraction = " << format_double(c.csv_test_fraction) << "\n\n"
      << "[environment]\n"
      << "availability = " << join(c.availability) << "\n"
      << "delay_tail = " << format_double(c.delay_tail) << "\n"
      << "max_delay = " << c.max_delay << "\n"
      << "delay_step = " << c.delay_step << "\n"
      << "full_downlink = " << (c.full_downlink ? "true" : "false") << "\n\n"
      << "[aggregation]\n"
      << "weight_base = " << format_double(c.weight_base) << "\n"
      << "tie_rule = " << c.tie_rule << "\n\n"
      << "[learning_rates]\n";
    for (const auto& [id, mu] : c.learning_rates) o << id << " = " << format_double(mu) << "\n";
    o << "\n[baselines]\n"
      << "subset_size = " << c.subset_size << "\n"
      << "pso_coordination = " << c.pso_coordination << "\n";
    return o.str();
}

int scale_count(int value, double scale) {
    const double x = value * scale;
    return std::max(1, static_cast<int>(std::ceil(x - 0.5)));
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"default-async", "heavy-delay", "sparse-participation",
                                                "full-downlink", "ideal"};
    return names;
}

ExperimentConfig preset(std::string_view name, double scale) {
    if (!(scale > 0.0 && scale <= 1.0)) throw ConfigError({"preset scale must lie in (0, 1]"});
    ExperimentConfig c;
    if (name == "default-async") {
    } else if (name == "heavy-delay") {
        c.delay_tail = 0.8;
        c.max_delay = 5;
    } else if (name == "sparse-participation") {
        c.availability = {0.025, 0.01, 0.0025, 0.0005};
        c.delay_step = 10;
        c.delay_tail = 0.4;
        c.max_delay = 60;
    } else if (name == "full-downlink") {
        c.full_downlink = true;
    } else if (name == "ideal") {
        c.availability = {1.0};
        c.delay_tail = 0.0;
        c.max_delay = 0;
    } else {
        throw ConfigError({"unknown preset '" + std::string(name) + "'"});
    }
    if (scale != 1.0) {
        c.clients = scale_count(c.clients, scale);
        c.horizon = scale_count(c.horizon, scale);
        for (int& g : c.group_sizes) g = scale_count(g, scale);
    }
    c.validate();
    return c;
}

}  // namespace paofed
