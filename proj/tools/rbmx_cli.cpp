// Command-line front end for the exact RBM sampler; talks to librbmx
// through the C API only.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rbm_exact.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitBudgetExhausted = 3;
constexpr int kExitValidationFailed = 4;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

struct RunConfig {
    std::size_t d = 1;
    std::string Q;        // comma-separated row-major entries; empty -> zeros
    double T = 1.0 / 3.0;
    std::string y0;       // comma-separated; empty -> zeros
    std::uint64_t n = 100;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int max_level = 22;
    std::uint64_t max_attempts = 1000000;
    std::uint64_t decision_budget = 1000000;
    std::string out_path;
    std::string format = "csv";
    unsigned threads = 1;

    std::string canonical() const {
        std::ostringstream os;
        os.precision(17);
        os << "d=" << d << ";Q=" << Q << ";T=" << T << ";y0=" << y0 << ";n=" << n
           << ";seed=" << seed << ";max_level=" << max_level << ";max_attempts=" << max_attempts
           << ";decision_budget=" << decision_budget << ";format=" << format;
        return os.str();
    }
};

// Flat key=value text or a JSON object; unknown keys are rejected.
bool load_config_file(const std::string& path, RunConfig& cfg, std::string& err) {
    std::ifstream in(path);
    if (!in) {
        err = "cannot open config file: " + path;
        return false;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();

    auto apply = [&](const std::string& key, const std::string& val) -> bool {
        if (key == "d") cfg.d = std::stoul(val);
        else if (key == "Q") cfg.Q = val;
        else if (key == "T") cfg.T = std::stod(val);
        else if (key == "y0") cfg.y0 = val;
        else if (key == "n") cfg.n = std::stoull(val);
        else if (key == "seed") { cfg.seed = std::stoull(val); cfg.seed_set = true; }
        else if (key == "max_level") cfg.max_level = std::stoi(val);
        else if (key == "max_attempts") cfg.max_attempts = std::stoull(val);
        else if (key == "decision_budget") cfg.decision_budget = std::stoull(val);
        else if (key == "out") cfg.out_path = val;
        else if (key == "format") cfg.format = val;
        else if (key == "threads") cfg.threads = static_cast<unsigned>(std::stoul(val));
        else { err = "unknown config key: " + key; return false; }
        return true;
    };

    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded()) {
            err = "malformed JSON config: " + path;
            return false;
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            std::string val;
            if (it.value().is_string())
                val = it.value().get<std::string>();
            else if (it.value().is_array()) {
                std::ostringstream os;
                os.precision(17);
                bool firstv = true;
                for (const auto& v : it.value()) {
                    if (!firstv) os << ',';
                    os << v.get<double>();
                    firstv = false;
                }
                val = os.str();
            } else {
                std::ostringstream os;
                os.precision(17);
                os << it.value();
                val = os.str();
            }
            if (!apply(it.key(), val)) return false;
        }
        return true;
    }

    std::stringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        const auto h = line.find('#');
        if (h != std::string::npos) line = line.substr(0, h);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        if (!apply(key, val)) return false;
    }
    return true;
}

int run_sample(const RunConfig& cfg) {
    std::vector<double> Q = cfg.Q.empty() ? std::vector<double>(cfg.d * cfg.d, 0.0)
                                          : parse_doubles(cfg.Q);
    std::vector<double> y0 = cfg.y0.empty() ? std::vector<double>(cfg.d, 0.0)
                                            : parse_doubles(cfg.y0);
    if (Q.size() != cfg.d * cfg.d) {
        std::cerr << "error: Q must have d*d entries\n";
        return kExitConfigError;
    }
    if (y0.size() != cfg.d) {
        std::cerr << "error: y0 must have d entries\n";
        return kExitConfigError;
    }

    rbmx_config cc{};
    cc.d = cfg.d;
    cc.Q = Q.data();
    cc.T = cfg.T;
    cc.y0 = y0.data();
    cc.seed = cfg.seed;
    cc.max_level = cfg.max_level;
    cc.max_attempts = cfg.max_attempts;
    cc.decision_budget = cfg.decision_budget;

    rbmx_sampler* sampler = nullptr;
    if (rbmx_sampler_create(&cc, &sampler) != RBMX_OK) {
        std::cerr << "error: " << rbmx_last_error() << '\n';
        return kExitConfigError;
    }

    std::vector<rbmx_sample> results(cfg.n);
    const unsigned workers = cfg.threads == 0 ? 1 : cfg.threads;
    std::vector<std::future<int>> futs;
    const std::uint64_t block = (cfg.n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t lo = w * block, hi = std::min<std::uint64_t>(cfg.n, (w + 1) * block);
        if (lo >= hi) break;
        futs.push_back(std::async(std::launch::async, [&, lo, hi]() -> int {
            for (std::uint64_t i = lo; i < hi; ++i)
                if (rbmx_sampler_draw(sampler, i, &results[i]) != RBMX_OK) return 1;
            return 0;
        }));
    }
    int draw_err = 0;
    for (auto& f : futs) draw_err |= f.get();
    rbmx_sampler_destroy(sampler);
    if (draw_err) {
        std::cerr << "error: " << rbmx_last_error() << '\n';
        return kExitConfigError;
    }

    const std::uint64_t config_hash = fnv1a(cfg.canonical());
    bool any_exhausted = false;
    std::ostringstream os;
    os.precision(17);
    if (cfg.format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (std::uint64_t i = 0; i < cfg.n; ++i) {
            const rbmx_sample& r = results[i];
            nlohmann::json row;
            row["schema_version"] = 1;
            row["index"] = i;
            std::vector<double> vals(r.value, r.value + cfg.d);
            row["value"] = vals;
            row["attempts"] = r.attempts;
            row["max_level"] = r.max_level_reached;
            row["status"] = r.status == RBMX_SAMPLE_ACCEPTED ? "accepted" : "budget_exhausted";
            row["seed"] = cfg.seed;
            row["config_hash"] = config_hash;
            arr.push_back(row);
            any_exhausted |= r.status != RBMX_SAMPLE_ACCEPTED;
        }
        os << arr.dump(2) << '\n';
    } else {
        os << "# rbmx-csv v1; columns: index";
        for (std::size_t i = 0; i < cfg.d; ++i) os << ",y_" << (i + 1);
        os << ",attempts,max_level,status,seed,config_hash\n";
        for (std::uint64_t i = 0; i < cfg.n; ++i) {
            const rbmx_sample& r = results[i];
            os << i;
            for (std::size_t c = 0; c < cfg.d; ++c) os << ',' << r.value[c];
            os << ',' << r.attempts << ',' << r.max_level_reached << ','
               << (r.status == RBMX_SAMPLE_ACCEPTED ? "accepted" : "budget_exhausted") << ','
               << cfg.seed << ',' << config_hash << '\n';
            any_exhausted |= r.status != RBMX_SAMPLE_ACCEPTED;
        }
    }

    if (cfg.out_path.empty()) {
        std::cout << os.str();
    } else {
        std::ofstream out(cfg.out_path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write " << cfg.out_path << '\n';
            return kExitConfigError;
        }
        out << os.str();
    }
    return any_exhausted ? kExitBudgetExhausted : kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact sampler for multidimensional reflected Brownian motion"};
    app.require_subcommand(1);

    RunConfig cfg;
    if (const char* env_seed = std::getenv("RBM_EXACT_SEED")) {
        cfg.seed = std::strtoull(env_seed, nullptr, 10);
        cfg.seed_set = true;
    }
    std::string config_path;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "flat key=value or JSON config file");
        cmd->add_option("--seed", cfg.seed, "RNG seed (default from RBM_EXACT_SEED)");
        cmd->add_option("--out", cfg.out_path, "output path (default stdout)");
    };

    CLI::App* sample = app.add_subcommand("sample", "draw exact samples of Y(T)");
    add_common(sample);
    sample->add_option("--d", cfg.d, "dimension");
    sample->add_option("--Q", cfg.Q, "routing matrix, comma-separated row-major");
    sample->add_option("--T", cfg.T, "query time in (0,1]");
    sample->add_option("--y0", cfg.y0, "start point, comma-separated");
    sample->add_option("--n", cfg.n, "number of samples");
    sample->add_option("--max-level", cfg.max_level, "layer refinement cap");
    sample->add_option("--max-attempts", cfg.max_attempts, "proposal cap per sample");
    sample->add_option("--decision-budget", cfg.decision_budget,
                       "bracket refinements per decision");
    sample->add_option("--format", cfg.format, "csv or json");
    sample->add_option("--threads", cfg.threads, "worker threads (deterministic output)");

    CLI::App* validate = app.add_subcommand("validate", "run a named validation suite");
    std::string suite = "one_d_halfnormal";
    add_common(validate);
    validate->add_option("--suite", suite, "one_d_halfnormal | gamma_mc | skorokhod");

    CLI::App* gamma_cmd = app.add_subcommand("gamma", "bracket a bridge band probability");
    double gL = -1.0, gU = 1.0, gr = 1.0, ga = 0.0, gb = 0.0, gtol = 1e-9;
    gamma_cmd->add_option("--L", gL, "lower band level");
    gamma_cmd->add_option("--U", gU, "upper band level");
    gamma_cmd->add_option("--r", gr, "bridge duration");
    gamma_cmd->add_option("--a", ga, "bridge start value");
    gamma_cmd->add_option("--b", gb, "bridge end value");
    gamma_cmd->add_option("--tol", gtol, "bracket width");

    CLI::App* conv = app.add_subcommand("convergence", "envelope-area decay study");
    int lv_lo = 2, lv_hi = 10;
    std::uint64_t conv_seeds = 200;
    add_common(conv);
    conv->add_option("--level-lo", lv_lo, "first level");
    conv->add_option("--level-hi", lv_hi, "last level");
    conv->add_option("--seeds", conv_seeds, "number of seeded replications");

    CLI::App* inspect = app.add_subcommand("inspect", "dump a seeded layer set");
    int ins_level = 3;
    add_common(inspect);
    inspect->add_option("--level", ins_level, "refine uniformly to this level");

    CLI11_PARSE(app, argc, argv);

    if (!config_path.empty()) {
        std::string err;
        RunConfig file_cfg;  // file first, then re-apply flags by reparsing
        if (!load_config_file(config_path, file_cfg, err)) {
            std::cerr << "error: " << err << '\n';
            return kExitConfigError;
        }
        // Flags override the file: merge file values only where the flag
        // was not provided on the command line.
        auto overridden = [&](const CLI::App* cmd, const std::string& name) {
            return cmd->count(name) > 0;
        };
        const CLI::App* cmd = app.get_subcommands().front();
        if (!overridden(cmd, "--d") && file_cfg.d != 1) cfg.d = file_cfg.d;
        if (!overridden(cmd, "--Q") && !file_cfg.Q.empty()) cfg.Q = file_cfg.Q;
        if (!overridden(cmd, "--T") && file_cfg.T != 1.0 / 3.0) cfg.T = file_cfg.T;
        if (!overridden(cmd, "--y0") && !file_cfg.y0.empty()) cfg.y0 = file_cfg.y0;
        if (!overridden(cmd, "--n") && file_cfg.n != 100) cfg.n = file_cfg.n;
        if (!overridden(cmd, "--seed") && file_cfg.seed_set) cfg.seed = file_cfg.seed;
        if (!overridden(cmd, "--max-level") && file_cfg.max_level != 22)
            cfg.max_level = file_cfg.max_level;
        if (!overridden(cmd, "--max-attempts") && file_cfg.max_attempts != 1000000)
            cfg.max_attempts = file_cfg.max_attempts;
        if (!overridden(cmd, "--decision-budget") && file_cfg.decision_budget != 1000000)
            cfg.decision_budget = file_cfg.decision_budget;
        if (!overridden(cmd, "--out") && !file_cfg.out_path.empty())
            cfg.out_path = file_cfg.out_path;
        if (!overridden(cmd, "--format") && file_cfg.format != "csv") cfg.format = file_cfg.format;
        if (!overridden(cmd, "--threads") && file_cfg.threads != 1) cfg.threads = file_cfg.threads;
    }

    if (sample->parsed()) return run_sample(cfg);

    if (validate->parsed()) {
        char* json = nullptr;
        int pass = 0;
        if (rbmx_validate(suite.c_str(), cfg.seed, &json, &pass) != RBMX_OK) {
            std::cerr << "error: " << rbmx_last_error() << '\n';
            return kExitConfigError;
        }
        std::string text = json ? json : "{}";
        rbmx_string_free(json);
        if (cfg.out_path.empty()) {
            std::cout << text << '\n';
        } else {
            std::ofstream out(cfg.out_path, std::ios::binary);
            out << text << '\n';
        }
        return pass ? kExitOk : kExitValidationFailed;
    }

    if (gamma_cmd->parsed()) {
        double lo = 0.0, hi = 0.0;
        if (rbmx_gamma_bounds(gL, gU, gr, ga, gb, gtol, &lo, &hi) != RBMX_OK) {
            std::cerr << "error: " << rbmx_last_error() << '\n';
            return kExitConfigError;
        }
        std::cout.precision(15);
        std::cout << "gamma in [" << lo << ", " << hi << "], midpoint " << 0.5 * (lo + hi)
                  << '\n';
        return kExitOk;
    }

    if (conv->parsed()) {
        char* csv = nullptr;
        double slope = 0.0;
        if (rbmx_convergence(lv_lo, lv_hi, conv_seeds, cfg.seed, &csv, &slope) != RBMX_OK) {
            std::cerr << "error: " << rbmx_last_error() << '\n';
            return kExitConfigError;
        }
        std::string text = csv ? csv : "";
        rbmx_string_free(csv);
        if (cfg.out_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(cfg.out_path, std::ios::binary);
            out << text;
        }
        return kExitOk;
    }

    if (inspect->parsed()) {
        char* table = nullptr;
        if (rbmx_inspect_layers(cfg.seed, ins_level, &table) != RBMX_OK) {
            std::cerr << "error: " << rbmx_last_error() << '\n';
            return kExitConfigError;
        }
        std::string text = table ? table : "";
        rbmx_string_free(table);
        if (cfg.out_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(cfg.out_path, std::ios::binary);
            out << text;
        }
        return kExitOk;
    }
    return kExitConfigError;
}
