#include "lcbn/io.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lcbn/errors.hpp"

namespace lcbn {

using nlohmann::json;

// ---- sha256 -----------------------------------------------------------------

namespace {

struct Sha256 {
    std::uint32_t h[8] = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                          0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
    std::uint64_t total = 0;
    std::array<std::uint8_t, 64> buf{};
    size_t fill = 0;

    static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void block(const std::uint8_t* p) {
        static const std::uint32_t k[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
            0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
            0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
            0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
            0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
            0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
            0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
            0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
                   (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
        for (int i = 16; i < 64; ++i) {
            const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6], hh = h[7];
        for (int i = 0; i < 64; ++i) {
            const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            const std::uint32_t ch = (e & f) ^ (~e & g);
            const std::uint32_t t1 = hh + s1 + ch + k[i] + w[i];
            const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            const std::uint32_t t2 = s0 + maj;
            hh = g; g = f; f = e; e = d + t1; d = c; c = b; b = a; a = t1 + t2;
        }
        h[0] += a; h[1] += b; h[2] += c; h[3] += d; h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
    }

    void update(const void* data, size_t len) {
        const std::uint8_t* p = static_cast<const std::uint8_t*>(data);
        total += len;
        while (len > 0) {
            const size_t take = std::min(len, buf.size() - fill);
            std::memcpy(buf.data() + fill, p, take);
            fill += take;
            p += take;
            len -= take;
            if (fill == buf.size()) {
                block(buf.data());
                fill = 0;
            }
        }
    }

    std::string hex() {
        const std::uint64_t bits = total * 8;
        const std::uint8_t one = 0x80;
        update(&one, 1);
        const std::uint8_t zero = 0;
        while (fill != 56) update(&zero, 1);
        std::uint8_t len_be[8];
        for (int i = 0; i < 8; ++i) len_be[i] = static_cast<std::uint8_t>(bits >> (56 - 8 * i));
        update(len_be, 8);
        std::ostringstream os;
        for (std::uint32_t v : h)
            for (int i = 3; i >= 0; --i) {
                static const char* d = "0123456789abcdef";
                os << d[(v >> (8 * i + 4)) & 0xf] << d[(v >> (8 * i)) & 0xf];
            }
        return os.str();
    }
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    size_t b = s.find_last_not_of(" \t");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

void require_fields(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& f : allowed)
            if (it.key() == f) {
                ok = true;
                break;
            }
        if (!ok) throw InputError("unknown field \"" + it.key() + "\" in " + where);
    }
}

}  // namespace

std::string sha256_hex(const void* data, size_t len) {
    Sha256 s;
    s.update(data, len);
    return s.hex();
}

std::string sha256_hex(const std::string& s) { return sha256_hex(s.data(), s.size()); }

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    Sha256 s;
    char chunk[65536];
    while (in) {
        in.read(chunk, sizeof(chunk));
        s.update(chunk, static_cast<size_t>(in.gcount()));
    }
    return s.hex();
}

json manifest_json(const std::string& command, const json& resolved_config,
                   const std::vector<std::string>& input_paths, std::uint64_t seed,
                   double wall_clock_sec) {
    json inputs = json::object();
    for (const auto& p : input_paths) inputs[p] = sha256_file(p);
    return json{{"command", command},
                {"version", kLibraryVersion},
                {"seed", seed},
                {"config", resolved_config},
                {"inputs", inputs},
                {"wall_clock_sec", wall_clock_sec}};
}

// ---- CSV --------------------------------------------------------------------

QMatrix load_q_csv(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::vector<std::string> names;
    std::vector<PatternBits> rows;
    int k_cols = -1;
    std::string line;
    int lineno = 0;
    bool first_data = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split_csv_line(line);
        if (first_data) {
            bool numeric = true;
            for (const auto& c : cells) {
                const std::string t = trim(c);
                if (t != "0" && t != "1") {
                    numeric = false;
                    break;
                }
            }
            if (!numeric) {  // header row with attribute names
                for (const auto& c : cells) names.push_back(trim(c));
                k_cols = static_cast<int>(cells.size());
                first_data = false;
                continue;
            }
            first_data = false;
        }
        if (k_cols < 0) k_cols = static_cast<int>(cells.size());
        if (static_cast<int>(cells.size()) != k_cols)
            throw InputError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(k_cols) +
                             " columns, found " + std::to_string(cells.size()));
        PatternBits r = 0;
        for (int k = 0; k < k_cols; ++k) {
            const std::string t = trim(cells[static_cast<size_t>(k)]);
            if (t == "1")
                r |= attr_bit(k_cols, k + 1);
            else if (t != "0")
                throw InputError(path + ":" + std::to_string(lineno) + ": Q-matrix cell \"" + t +
                                 "\" is not 0 or 1");
        }
        rows.push_back(r);
    }
    if (rows.empty()) throw InputError(path + ": no Q-matrix rows");
    const int j_rows = static_cast<int>(rows.size());
    QMatrix q(j_rows, k_cols, std::move(rows));
    if (!names.empty()) q.set_attribute_names(names);
    if (warnings)
        for (int j : q.zero_rows())
            warnings->push_back("Q row " + std::to_string(j) +
                                " is all zero; the item is modeled as constant-probability");
    return q;
}

void write_q_csv(const std::string& path, const QMatrix& q, const std::string& manifest_line) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    if (!manifest_line.empty()) out << "# " << manifest_line << "\n";
    if (!q.attribute_names().empty()) {
        for (int k = 0; k < q.K(); ++k) out << (k ? "," : "") << q.attribute_names()[static_cast<size_t>(k)];
        out << "\n";
    }
    for (int j = 1; j <= q.J(); ++j) {
        for (int k = 1; k <= q.K(); ++k) out << (k > 1 ? "," : "") << (q.entry(j, k) ? 1 : 0);
        out << "\n";
    }
}

Dataset load_responses_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::vector<std::int8_t> cells;
    int j_cols = -1;
    std::string line;
    int lineno = 0, row = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_csv_line(line);
        if (j_cols < 0) j_cols = static_cast<int>(fields.size());
        if (static_cast<int>(fields.size()) != j_cols)
            throw InputError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(j_cols) +
                             " columns, found " + std::to_string(fields.size()));
        ++row;
        bool any_observed = false;
        for (const auto& f : fields) {
            const std::string t = trim(f);
            if (t == "0") {
                cells.push_back(0);
                any_observed = true;
            } else if (t == "1") {
                cells.push_back(1);
                any_observed = true;
            } else if (t.empty() || t == "NA" || t == "na") {
                cells.push_back(Dataset::kMissing);
            } else {
                throw InputError(path + ":" + std::to_string(lineno) + ": response cell \"" + t +
                                 "\" is not 0, 1, or NA");
            }
        }
        if (!any_observed)
            throw InputError(path + ": row " + std::to_string(row) + " has no observed response");
    }
    if (cells.empty()) throw InputError(path + ": no response rows");
    return Dataset(row, j_cols, std::move(cells));
}

void write_responses_csv(const std::string& path, const Dataset& data, const std::string& manifest_line) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    if (!manifest_line.empty()) out << "# " << manifest_line << "\n";
    for (int i = 0; i < data.N(); ++i) {
        for (int j = 0; j < data.J(); ++j) {
            if (j) out << ",";
            const std::int8_t c = data.at(i, j);
            if (c != Dataset::kMissing) out << static_cast<int>(c);
        }
        out << "\n";
    }
}

// ---- hierarchy files -----------------------------------------------------------

Hierarchy hierarchy_from_json(const json& j) {
    require_fields(j, {"K", "edges"}, "hierarchy");
    if (!j.contains("K") || !j["K"].is_number_integer()) throw InputError("hierarchy needs an integer K");
    const int K = j["K"].get<int>();
    std::vector<std::pair<int, int>> edges;
    if (j.contains("edges")) {
        for (const auto& e : j["edges"]) {
            if (!e.is_array() || e.size() != 2)
                throw InputError("hierarchy edges must be [k, l] pairs");
            edges.emplace_back(e[0].get<int>(), e[1].get<int>());
        }
    }
    return build_hierarchy(K, edges);
}

json hierarchy_to_json(const Hierarchy& h) {
    json edges = json::array();
    for (auto [k, l] : h.reduction_edges()) edges.push_back(json::array({k, l}));
    return json{{"K", h.K()}, {"edges", edges}};
}

Hierarchy load_hierarchy(const std::string& path) {
    const std::string text = read_text_file(path);
    // JSON when the first non-space character opens an object
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
        if (c == '{') return hierarchy_from_json(json::parse(text));
        break;
    }
    std::istringstream in(text);
    std::string line;
    int K = 0;
    std::vector<std::pair<int, int>> edges;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t[0] == 'K' || t[0] == 'k') {
            std::istringstream ls(t.substr(1));
            char eq;
            if (!(ls >> eq)) throw InputError(path + ":" + std::to_string(lineno) + ": malformed K line");
            if (eq == '=' || eq == ':') {
                if (!(ls >> K)) throw InputError(path + ":" + std::to_string(lineno) + ": malformed K line");
            } else {
                ls.putback(eq);
                if (!(ls >> K)) throw InputError(path + ":" + std::to_string(lineno) + ": malformed K line");
            }
            continue;
        }
        const size_t arrow = t.find("->");
        if (arrow == std::string::npos)
            throw InputError(path + ":" + std::to_string(lineno) + ": expected \"k -> l\"");
        int k = 0, l = 0;
        try {
            k = std::stoi(trim(t.substr(0, arrow)));
            l = std::stoi(trim(t.substr(arrow + 2)));
        } catch (const std::exception&) {
            throw InputError(path + ":" + std::to_string(lineno) + ": expected \"k -> l\"");
        }
        edges.emplace_back(k, l);
        K = std::max({K, k, l});
    }
    if (K == 0) throw InputError(path + ": no attributes found");
    return build_hierarchy(K, edges);
}

void write_hierarchy_json(const std::string& path, const Hierarchy& h, const json* manifest) {
    json j = hierarchy_to_json(h);
    if (manifest) j["manifest"] = *manifest;
    write_json_file(path, j);
}

// ---- config ----------------------------------------------------------------------

Control control_from_json(const json& j, Control base) {
    require_fields(j,
                   {"max_iter", "tol", "restarts", "rho_n", "pem_c", "theta_clamp", "threads",
                    "enumeration_cap"},
                   "control");
    Control c = base;
    if (j.contains("max_iter")) c.max_iter = j["max_iter"].get<int>();
    if (j.contains("tol")) c.tol = j["tol"].get<double>();
    if (j.contains("restarts")) c.restarts = j["restarts"].get<int>();
    if (j.contains("rho_n")) c.rho_n = j["rho_n"].get<double>();
    if (j.contains("pem_c")) c.pem_c = j["pem_c"].get<double>();
    if (j.contains("theta_clamp")) c.theta_clamp = j["theta_clamp"].get<double>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    if (j.contains("enumeration_cap")) c.enumeration_cap = j["enumeration_cap"].get<int>();
    return c;
}

ExperimentConfig experiment_config_from_json(const json& j) {
    require_fields(j,
                   {"name", "model", "N", "noise", "replications", "lambda_grid", "seed", "hierarchy",
                    "t", "q", "p_override", "missing", "control"},
                   "experiment config");
    ExperimentConfig cfg;
    if (j.contains("name")) cfg.name = j["name"].get<std::string>();
    if (j.contains("model")) cfg.model = model_from_string(j["model"].get<std::string>());
    if (j.contains("N")) cfg.n = j["N"].get<int>();
    if (j.contains("noise")) cfg.noise = j["noise"].get<double>();
    if (j.contains("replications")) cfg.replications = j["replications"].get<int>();
    if (j.contains("lambda_grid")) cfg.lambda_grid = j["lambda_grid"].get<std::vector<double>>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();

    bool fixture_q = false, fixture_t = false;
    if (!j.contains("hierarchy")) throw InputError("experiment config needs a hierarchy");
    if (j["hierarchy"].is_string()) {
        const std::string name = j["hierarchy"].get<std::string>();
        DiamondFixture f;
        if (name == "diamond")
            f = diamond_fixture();
        else if (name == "timss-shape")
            f = timss_shape_fixture();
        else
            throw InputError("unknown hierarchy fixture \"" + name + "\"");
        cfg.hierarchy = f.hierarchy;
        cfg.t = f.t;
        cfg.q = f.q;
        fixture_q = fixture_t = true;
    } else {
        cfg.hierarchy = hierarchy_from_json(j["hierarchy"]);
    }

    if (j.contains("t")) {
        cfg.t = LcbnParams{j["t"].get<std::vector<double>>()};
    } else if (!fixture_t && !j.contains("p_override")) {
        throw InputError("experiment config needs t (or a named hierarchy fixture, or p_override)");
    }

    if (j.contains("q")) {
        const json& qj = j["q"];
        if (qj.is_string()) {
            const std::string name = qj.get<std::string>();
            if (name == "diamond")
                cfg.q = diamond_fixture().q;
            else if (name == "timss-shape")
                cfg.q = timss_shape_fixture().q;
            else
                throw InputError("unknown Q fixture \"" + name + "\"");
        } else if (qj.is_object() && qj.contains("csv")) {
            require_fields(qj, {"csv"}, "q");
            cfg.q = load_q_csv(qj["csv"].get<std::string>());
        } else if (qj.is_object() && qj.contains("rows")) {
            require_fields(qj, {"rows"}, "q");
            const auto rows_in = qj["rows"].get<std::vector<std::vector<int>>>();
            if (rows_in.empty()) throw InputError("q.rows is empty");
            const int K = static_cast<int>(rows_in.front().size());
            std::vector<PatternBits> rows;
            for (const auto& r : rows_in) {
                if (static_cast<int>(r.size()) != K) throw InputError("ragged q.rows");
                PatternBits b = 0;
                for (int k = 0; k < K; ++k) {
                    if (r[static_cast<size_t>(k)] == 1)
                        b |= attr_bit(K, k + 1);
                    else if (r[static_cast<size_t>(k)] != 0)
                        throw InputError("q.rows entries must be 0 or 1");
                }
                rows.push_back(b);
            }
            const int j_rows = static_cast<int>(rows.size());
            cfg.q = QMatrix(j_rows, K, std::move(rows));
        } else {
            throw InputError("q must be a fixture name, {\"csv\": path}, or {\"rows\": [[...]]}");
        }
    } else if (!fixture_q) {
        throw InputError("experiment config needs q (or a named hierarchy fixture)");
    }

    if (j.contains("p_override")) cfg.p_override = j["p_override"].get<std::vector<double>>();

    if (j.contains("missing")) {
        const json& mj = j["missing"];
        require_fields(mj, {"type", "rate", "blocks", "blocks_per_student"}, "missing");
        const std::string type = mj.value("type", "none");
        if (type == "none") {
            cfg.missing.type = MissingSpec::Type::None;
        } else if (type == "random") {
            cfg.missing.type = MissingSpec::Type::Random;
            cfg.missing.rate = mj.value("rate", 0.0);
        } else if (type == "blocks") {
            cfg.missing.type = MissingSpec::Type::Blocks;
            cfg.missing.blocks = mj.value("blocks", 0);
            cfg.missing.blocks_per_student = mj.value("blocks_per_student", 0);
        } else {
            throw InputError("unknown missingness type \"" + type + "\"");
        }
    }

    if (j.contains("control")) cfg.control = control_from_json(j["control"]);
    cfg.validate();
    return cfg;
}

std::vector<ExperimentConfig> load_experiment_configs(const std::string& path) {
    const json j = read_json_file(path);
    std::vector<ExperimentConfig> out;
    if (j.contains("settings")) {
        require_fields(j, {"name", "settings"}, "experiment config file");
        for (const auto& s : j["settings"]) out.push_back(experiment_config_from_json(s));
    } else {
        out.push_back(experiment_config_from_json(j));
    }
    if (out.empty()) throw InputError(path + ": no experiment settings");
    return out;
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
    json j{{"name", cfg.name},
           {"model", to_string(cfg.model)},
           {"N", cfg.n},
           {"noise", cfg.noise},
           {"replications", cfg.replications},
           {"seed", cfg.seed},
           {"hierarchy", hierarchy_to_json(cfg.hierarchy)}};
    if (!cfg.lambda_grid.empty()) j["lambda_grid"] = cfg.lambda_grid;
    if (!cfg.t.t.empty()) j["t"] = cfg.t.t;
    json rows = json::array();
    for (int r = 1; r <= cfg.q.J(); ++r) {
        json row = json::array();
        for (int k = 1; k <= cfg.q.K(); ++k) row.push_back(cfg.q.entry(r, k) ? 1 : 0);
        rows.push_back(row);
    }
    j["q"] = json{{"rows", rows}};
    if (!cfg.p_override.empty()) j["p_override"] = cfg.p_override;
    if (cfg.missing.type == MissingSpec::Type::Random)
        j["missing"] = json{{"type", "random"}, {"rate", cfg.missing.rate}};
    else if (cfg.missing.type == MissingSpec::Type::Blocks)
        j["missing"] = json{{"type", "blocks"},
                            {"blocks", cfg.missing.blocks},
                            {"blocks_per_student", cfg.missing.blocks_per_student}};
    j["control"] = json{{"max_iter", cfg.control.max_iter},   {"tol", cfg.control.tol},
                        {"restarts", cfg.control.restarts},   {"rho_n", cfg.control.rho_n},
                        {"pem_c", cfg.control.pem_c},         {"theta_clamp", cfg.control.theta_clamp},
                        {"threads", cfg.control.threads},     {"enumeration_cap", cfg.control.enumeration_cap}};
    return j;
}

// ---- reports -----------------------------------------------------------------------

namespace {

json theta_json(const MeasurementParams& mp) {
    json j{{"model", to_string(mp.model)}};
    if (mp.model == ModelType::Dina) {
        j["slip"] = mp.slip;
        j["guess"] = mp.guess;
    } else {
        json items = json::array();
        for (int it = 1; it <= mp.J; ++it) {
            std::vector<int> required;
            for (int k = 1; k <= mp.K; ++k)
                if (has_attr(mp.q[static_cast<size_t>(it - 1)], mp.K, k)) required.push_back(k);
            items.push_back(json{{"item", it}, {"required", required}, {"delta", mp.delta(it)}});
        }
        j["items"] = items;
    }
    return j;
}

json proportions_json(const ProportionVector& p) {
    json pats = json::array();
    for (PatternBits b : p.support.patterns()) pats.push_back(render_bits(p.support.K(), b));
    return json{{"patterns", pats}, {"values", p.p}};
}

json step2_json(const FitResult& fit) {
    json j{{"hierarchy", hierarchy_to_json(fit.hierarchy)},
           {"t", fit.t.t},
           {"theta", theta_json(fit.theta)},
           {"p", proportions_json(fit.p)},
           {"loglik", fit.loglik},
           {"ebic", fit.ebic},
           {"bic", fit.bic},
           {"iterations", fit.iterations},
           {"converged", fit.converged},
           {"loglik_trace", fit.loglik_trace},
           {"warnings", fit.warnings}};
    if (fit.lambda_hat) j["lambda_hat"] = *fit.lambda_hat;
    return j;
}

}  // namespace

json fit_report_json(const TwoStepResult& fit, const std::vector<double>& grid) {
    json per_lambda = json::array();
    for (size_t i = 0; i < grid.size(); ++i) {
        const PemResult& r = fit.step1.per_lambda[i];
        if (r.selected.empty() && r.p.empty()) {
            per_lambda.push_back(json{{"lambda", grid[i]}, {"failed", true}});
            continue;
        }
        json sel = json::array();
        for (PatternBits b : r.selected.patterns()) sel.push_back(render_bits(r.selected.K(), b));
        per_lambda.push_back(json{{"lambda", grid[i]},
                                  {"ebic", r.ebic},
                                  {"bic", r.bic},
                                  {"loglik", r.loglik},
                                  {"selected", sel},
                                  {"iterations", r.iterations},
                                  {"converged", r.converged}});
    }
    json j = step2_json(fit.step2);
    j["step1"] = json{{"lambda_hat", fit.step1.lambda_hat},
                      {"per_lambda", per_lambda},
                      {"ebic", fit.step1_ebic},
                      {"bic", fit.step1_bic},
                      {"failures", fit.step1.failures}};
    j["step1_vs_step2"] = json{{"step1_ebic", fit.step1_ebic},
                               {"step2_ebic", fit.step2_ebic},
                               {"step1_bic", fit.step1_bic},
                               {"step2_bic", fit.step2_bic}};
    return j;
}

json fit_report_json(const FitResult& fit) { return step2_json(fit); }

json condition_report_json(const ConditionReport& rep) {
    json conds = json::object();
    for (const auto& [name, res] : rep.conditions)
        conds[name] = json{{"verdict", to_string(res.verdict)}, {"witness", res.witness}};
    return json{{"check", rep.check},
                {"verdict", to_string(rep.overall())},
                {"conditions", conds},
                {"candidates_examined", rep.candidates_examined}};
}

json metrics_table_json(const MetricsTable& table) {
    auto row = [](const MethodMetrics& m) {
        json j{{"method", m.method},         {"acc_e", m.acc_e},
               {"acc_a", m.acc_a},           {"rmse_theta", m.rmse_theta},
               {"rmse_p", m.rmse_p},         {"argmin_ebic_pct", m.argmin_ebic_pct},
               {"argmin_bic_pct", m.argmin_bic_pct}};
        if (!std::isnan(m.rmse_t)) j["rmse_t"] = m.rmse_t;
        return j;
    };
    json reps = json::array();
    for (const ReplicateEstimate& r : table.replicates) {
        if (!r.ok) {
            reps.push_back(json{{"ok", false}, {"error", r.error}});
            continue;
        }
        json edges = json::array();
        for (auto [k, l] : r.hierarchy_edges) edges.push_back(json::array({k, l}));
        reps.push_back(json{{"ok", true},
                            {"lambda_hat", r.lambda_hat},
                            {"step1_selected", r.step1_selected},
                            {"step2_support", r.step2_support},
                            {"step1_p", r.step1_p_dense},
                            {"step1_theta", r.step1_theta_flat},
                            {"hierarchy_closure", edges},
                            {"t", r.t_hat},
                            {"step2_p", r.step2_p_dense},
                            {"step2_theta", r.step2_theta_flat},
                            {"step1_ebic", r.step1_ebic},
                            {"step2_ebic", r.step2_ebic},
                            {"step1_bic", r.step1_bic},
                            {"step2_bic", r.step2_bic},
                            {"step2_loglik", r.step2_loglik},
                            {"step2_converged", r.step2_converged},
                            {"step2_worst_drop", r.step2_worst_drop},
                            {"step1_worst_clean_drop", r.step1_worst_clean_drop},
                            {"step1_clamp_events", r.step1_clamp_events},
                            {"t_grad_max", r.t_grad_max}});
    }
    return json{{"setting", table.setting},
                {"replicates_ok", table.replicates_ok},
                {"replicates_failed", table.replicates_failed},
                {"metrics", json::array({row(table.pem), row(table.lcbn)})},
                {"replicates", reps}};
}

std::string metrics_table_csv(const MetricsTable& table) {
    std::ostringstream os;
    auto num = [](double v) {
        if (std::isnan(v)) return std::string("");
        std::ostringstream o;
        o.precision(6);
        o << v;
        return o.str();
    };
    os << "setting,method,replicates_ok,replicates_failed,acc_e,acc_a,rmse_theta,rmse_p,rmse_t,"
          "argmin_ebic_pct,argmin_bic_pct\n";
    for (const MethodMetrics* m : {&table.pem, &table.lcbn}) {
        os << table.setting << "," << m->method << "," << table.replicates_ok << ","
           << table.replicates_failed << "," << num(m->acc_e) << "," << num(m->acc_a) << ","
           << num(m->rmse_theta) << "," << num(m->rmse_p) << "," << num(m->rmse_t) << ","
           << num(m->argmin_ebic_pct) << "," << num(m->argmin_bic_pct) << "\n";
    }
    return os.str();
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << j.dump(2) << "\n";
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace lcbn
