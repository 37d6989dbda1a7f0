#include "ccp/cli.hpp"

#include "ccp/error.hpp"
#include "ccp/random.hpp"
#include "ccp/simgen.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ccp::cli {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) out.push_back(trim(field));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

bool parse_number(const std::string& text, double& value) {
    if (text.empty()) return false;
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (*begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    return ec == std::errc() && ptr == end;
}

std::size_t parse_size(const std::string& key, const std::string& text) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw InputError("setting '" + key + "' expects a nonnegative integer, got '" + text + "'");
    }
    return value;
}

double parse_real(const std::string& key, const std::string& text) {
    double value = 0.0;
    if (!parse_number(text, value)) throw InputError("setting '" + key + "' expects a number, got '" + text + "'");
    return value;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

json vector_json(const std::vector<double>& v) { return json(v); }

template <typename Row>
std::string csv_table(const std::string& header, std::size_t rows, Row&& row) {
    std::string out = header + "\n";
    for (std::size_t i = 0; i < rows; ++i) out += row(i) + "\n";
    return out;
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& field : split(text, ',')) {
        double v = 0.0;
        if (!parse_number(field, v)) throw InputError("invalid number '" + field + "' in list '" + text + "'");
        out.push_back(v);
    }
    if (out.empty()) throw InputError("empty number list");
    return out;
}

MultiSeries parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        const auto fields = split(trim(line), ',');
        std::vector<double> row;
        row.reserve(fields.size());
        bool numeric = true;
        for (const auto& f : fields) {
            double v = 0.0;
            if (!parse_number(f, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (header_allowed) {
                header_allowed = false;
                continue;
            }
            throw InputError("line " + std::to_string(line_no) + ": non-numeric field");
        }
        header_allowed = false;
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(rows.front().size()) +
                             " columns, found " + std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError("no data rows");

    Matrix values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return MultiSeries(std::move(values));
}

MultiSeries read_csv(const fs::path& path) { return parse_csv(read_text(path)); }

void write_file_atomic(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write " + tmp.string());
        out << text;
        if (!out) throw InputError("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_csv(const fs::path& path, const MultiSeries& series) {
    std::string out;
    for (std::size_t t = 1; t <= series.length(); ++t) {
        const auto row = series.at(t);
        for (Eigen::Index j = 0; j < row.size(); ++j) {
            if (j > 0) out += ',';
            out += format_double(row(j));
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

std::map<std::string, std::string> read_config_file(const fs::path& path) {
    std::istringstream in(read_text(path));
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        }
        out[trim(std::string_view(line).substr(0, eq))] = trim(std::string_view(line).substr(eq + 1));
    }
    return out;
}

void apply_settings(DetectConfig& config, const std::map<std::string, std::string>& settings) {
    for (const auto& [key, value] : settings) {
        if (key == "t_wash") {
            if (value == "auto" || value.empty()) {
                config.t_wash.reset();
            } else {
                config.t_wash = parse_size(key, value);
            }
        } else if (key == "t_train") {
            config.t_train = parse_size(key, value);
        } else if (key == "eps_train") {
            config.eps_train = parse_real(key, value);
        } else if (key == "r_ensemble") {
            config.r_ensemble = parse_size(key, value);
        } else if (key == "b_count") {
            config.b_count = parse_size(key, value);
        } else if (key == "nu") {
            config.nu = parse_real(key, value);
        } else if (key == "kappa") {
            config.kappa = parse_real(key, value);
        } else if (key == "q") {
            config.q = parse_real(key, value);
        } else if (key == "seed") {
            config.seed = parse_size(key, value);
        } else if (key == "statistic_exponent") {
            config.statistic_exponent = parse_real(key, value);
        } else {
            throw InputError("unknown setting '" + key + "'");
        }
    }
}

json to_json(const DetectConfig& c) {
    return json{
        {"t_wash", c.t_wash ? json(*c.t_wash) : json(nullptr)},
        {"t_train", c.t_train},
        {"eps_train", c.eps_train},
        {"r_ensemble", c.r_ensemble},
        {"b_count", c.b_count},
        {"nu", c.nu},
        {"kappa", c.kappa},
        {"q", c.q},
        {"seed", c.seed},
        {"statistic_exponent", c.statistic_exponent},
    };
}

json to_json(const DetectionReport& r) {
    json grid = json::array();
    for (const auto& cell : r.scaling.cells) {
        grid.push_back({{"c_input", cell.config.c_input}, {"c_bias", cell.config.c_bias}, {"nrmse", cell.nrmse}});
    }
    json steps = json::array();
    for (const auto& s : r.fit.steps) {
        steps.push_back({{"n", s.n}, {"alpha", s.alpha}, {"t_wash", s.t_wash}, {"nrmse", s.nrmse}});
    }
    std::vector<double> estimates = r.hall.estimates;

    return json{
        {"config", to_json(r.config)},
        {"result",
         {
             {"tau_hat", r.tau_hat()},
             {"k", r.k()},
             {"p", r.p()},
             {"reject", r.rejects_null()},
             {"block_length", r.null.block_length},
             {"t0", r.t0()},
             {"t_total", r.similarity.t_end},
         }},
        {"esn",
         {
             {"n", r.fit.params.n},
             {"alpha", r.fit.params.alpha},
             {"t_wash", r.fit.params.t_wash},
             {"t_train", r.fit.params.t_train},
             {"c_input", r.scaling.best.c_input},
             {"c_bias", r.scaling.best.c_bias},
             {"rho", r.scaling.best.rho},
             {"train_nrmse", r.fit.nrmse},
         }},
        {"provenance",
         {
             {"scaling_grid", grid},
             {"scaling_best_index", r.scaling.best_index},
             {"fit_steps", steps},
             {"degenerate_similarities", r.degenerate_similarities},
             {"hall",
              {
                  {"pilot_block_length", r.fit.params.t_wash},
                  {"pilot_estimate", r.hall.pilot_estimate},
                  {"candidates", r.hall.candidates},
                  {"estimates", vector_json(estimates)},
                  {"clamped", r.hall.clamped},
              }},
         }},
    };
}

json to_json(const eval::RunRecord& r) {
    return json{
        {"scenario_id", r.scenario_id},
        {"rep", r.rep},
        {"eps_train", r.eps_train},
        {"truth", r.truth ? json(*r.truth) : json(nullptr)},
        {"tau_hat", r.tau_hat},
        {"k", r.k},
        {"p", r.p},
        {"t0", r.t0},
        {"t_total", r.t_total},
        {"block_length", r.block_length},
        {"n", r.n},
        {"alpha", r.alpha},
        {"seed", r.seed},
    };
}

eval::RunRecord record_from_json(const json& j) {
    try {
        eval::RunRecord r;
        r.scenario_id = j.at("scenario_id").get<std::string>();
        r.rep = j.at("rep").get<std::size_t>();
        r.eps_train = j.at("eps_train").get<double>();
        if (!j.at("truth").is_null()) r.truth = j.at("truth").get<std::size_t>();
        r.tau_hat = j.at("tau_hat").get<std::size_t>();
        r.k = j.at("k").get<double>();
        r.p = j.at("p").get<double>();
        r.t0 = j.at("t0").get<std::size_t>();
        r.t_total = j.at("t_total").get<std::size_t>();
        r.block_length = j.value("block_length", std::size_t{0});
        r.n = j.value("n", std::size_t{0});
        r.alpha = j.value("alpha", 0.0);
        r.seed = j.value("seed", std::uint64_t{0});
        return r;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed run record: ") + e.what());
    }
}

DetectionReport cmd_detect(const fs::path& input, const DetectConfig& config, const fs::path& out_dir) {
    const MultiSeries y = read_csv(input);
    DetectionReport report = detect(y, config);

    fs::create_directories(out_dir);
    write_file_atomic(out_dir / "report.json", to_json(report).dump(2) + "\n");

    const auto& stat = report.proposal.statistic;
    write_file_atomic(out_dir / "statistic.csv", csv_table("t,k", stat.values.size(), [&](std::size_t i) {
                          return std::to_string(stat.t0 + 1 + i) + "," + format_double(stat.values[i]);
                      }));
    const auto& sim = report.similarity;
    write_file_atomic(out_dir / "similarity.csv", csv_table("t,s", sim.values.size(), [&](std::size_t i) {
                          return std::to_string(sim.t0 + 1 + i) + "," + format_double(sim.values[i]);
                      }));
    const auto& null = report.null.k_values;
    write_file_atomic(out_dir / "null.csv", csv_table("b,k", null.size(), [&](std::size_t i) {
                          return std::to_string(i + 1) + "," + format_double(null[i]);
                      }));
    return report;
}

std::string record_file_name(const std::string& scenario_id, double eps_train, std::size_t rep) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s_eps%g_rep%04zu.json", scenario_id.c_str(), eps_train, rep);
    return buf;
}

SimulateSummary cmd_simulate(const SimulateOptions& options, const fs::path& out_dir) {
    const simgen::ScenarioSpec& spec = simgen::find_scenario(options.scenario_id);
    if (options.reps < 1) throw InputError("reps must be at least 1");
    if (options.eps_train.empty()) throw InputError("at least one eps_train value is required");
    fs::create_directories(out_dir);

    SimulateSummary summary;
    const std::uint64_t scenario_key = fnv1a(spec.id);
    for (std::size_t rep = 0; rep < options.reps; ++rep) {
        std::optional<simgen::LabeledSeries> data;
        for (double eps : options.eps_train) {
            const fs::path file = out_dir / record_file_name(spec.id, eps, rep);
            if (fs::exists(file)) {
                try {
                    (void)record_from_json(json::parse(read_text(file)));
                    ++summary.skipped;
                    continue;
                } catch (const std::exception&) {
                    // unreadable leftovers are recomputed
                }
            }
            const auto data_seed = derive_seed(options.seed, {stream::simulation, scenario_key, rep});
            if (!data) data = simgen::scenario(spec.id, data_seed);

            DetectConfig config;
            config.t_wash = options.t_wash;
            config.t_train = options.t_train;
            config.eps_train = eps;
            config.r_ensemble = options.r_ensemble;
            config.b_count = options.b_count;
            config.seed = derive_seed(options.seed, {stream::simulation, scenario_key, rep, 1});
            const DetectionReport report = detect(data->series, config);

            eval::RunRecord record;
            record.scenario_id = spec.id;
            record.rep = rep;
            record.eps_train = eps;
            record.truth = data->truth;
            record.tau_hat = report.tau_hat();
            record.k = report.k();
            record.p = report.p();
            record.t0 = report.t0();
            record.t_total = data->series.length();
            record.block_length = report.null.block_length;
            record.n = report.fit.params.n;
            record.alpha = report.fit.params.alpha;
            record.seed = config.seed;
            write_file_atomic(file, to_json(record).dump(2) + "\n");
            ++summary.computed;
        }
    }
    return summary;
}

std::vector<eval::RunRecord> load_records(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw InputError("records directory " + dir.string() + " does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<eval::RunRecord> records;
    records.reserve(files.size());
    for (const auto& f : files) {
        json j;
        try {
            j = json::parse(read_text(f));
        } catch (const json::exception& e) {
            throw InputError(f.string() + ": " + e.what());
        }
        records.push_back(record_from_json(j));
    }
    return records;
}

EvaluateSummary cmd_evaluate(const fs::path& records_dir, double q, const std::vector<double>& deltas,
                             const fs::path& out_dir) {
    const auto records = load_records(records_dir);
    if (records.empty()) throw InputError("no run records in " + records_dir.string());
    if (deltas.empty()) throw InputError("delta grid is empty");

    using Key = std::pair<std::string, double>;
    std::map<Key, std::vector<eval::RunRecord>> change;
    std::map<Key, std::vector<eval::RunRecord>> no_change;
    for (const auto& r : records) {
        (r.truth ? change : no_change)[{r.scenario_id, r.eps_train}].push_back(r);
    }

    fs::create_directories(out_dir);
    EvaluateSummary summary;
    if (!change.empty()) {
        std::string ari = "scenario_id,eps_train,reps,mean_ari\n";
        std::string cdf = "scenario_id,eps_train,delta,fraction\n";
        for (const auto& [key, group] : change) {
            double sum = 0.0;
            for (const auto& r : group) sum += eval::record_ari(r, q);
            ari += key.first + "," + format_double(key.second) + "," + std::to_string(group.size()) + "," +
                   format_double(sum / static_cast<double>(group.size())) + "\n";
            const auto curve = eval::error_cdf(group, deltas, q);
            for (std::size_t i = 0; i < curve.size(); ++i) {
                if (i > 0 && curve[i] < curve[i - 1]) throw InvariantError("error CDF is not monotone");
                cdf += key.first + "," + format_double(key.second) + "," + format_double(deltas[i]) + "," +
                       format_double(curve[i]) + "\n";
            }
        }
        write_file_atomic(out_dir / "ari.csv", ari);
        write_file_atomic(out_dir / "error_cdf.csv", cdf);
        summary.written.push_back(out_dir / "ari.csv");
        summary.written.push_back(out_dir / "error_cdf.csv");
    }
    if (!no_change.empty()) {
        std::string t1 = "scenario_id,eps_train,reps,type1\n";
        for (const auto& [key, group] : no_change) {
            t1 += key.first + "," + format_double(key.second) + "," + std::to_string(group.size()) + "," +
                  format_double(eval::type1_rate(group, q)) + "\n";
        }
        write_file_atomic(out_dir / "type1.csv", t1);
        summary.written.push_back(out_dir / "type1.csv");
    }

    const json meta{
        {"q", q},
        {"records", records.size()},
        {"non_detection_convention", "runs with p > q are scored with tau_hat = T"},
        {"detection_rule", "p <= q"},
    };
    write_file_atomic(out_dir / "summary.json", meta.dump(2) + "\n");
    summary.written.push_back(out_dir / "summary.json");
    return summary;
}

} // namespace ccp::cli
