#include "nsbm/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace nsbm {

namespace {

using json = nlohmann::json;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << std::setprecision(17);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path);
    return in;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

json table_to_json(const QTable& t) {
    json rows = json::array();
    for (int q = 0; q < t.size(); ++q) {
        json row = json::array();
        for (int l = 0; l < t.size(); ++l) row.push_back(t(q, l));
        rows.push_back(row);
    }
    return rows;
}

QTable table_from_json(const json& rows) {
    const int Q = static_cast<int>(rows.size());
    QTable t(Q, 0.0);
    for (int q = 0; q < Q; ++q)
        for (int l = 0; l < Q; ++l) t.set(q, l, rows[q][l].get<double>());
    return t;
}

json theta_to_json(const ModelParams& theta) {
    return json{{"Q", theta.Q},
                {"pi", theta.pi},
                {"w", table_to_json(theta.w)},
                {"sigma0", theta.sigma0},
                {"mu", table_to_json(theta.mu)},
                {"sigma", table_to_json(theta.sigma)}};
}

ModelParams theta_from_json(const json& j) {
    ModelParams theta;
    theta.Q = j.at("Q").get<int>();
    theta.pi = j.at("pi").get<std::vector<double>>();
    theta.w = table_from_json(j.at("w"));
    theta.sigma0 = j.at("sigma0").get<double>();
    theta.mu = table_from_json(j.at("mu"));
    theta.sigma = table_from_json(j.at("sigma"));
    return theta;
}

}  // namespace

void write_observation_csv(const std::string& path, const ObservationMatrix& x) {
    auto out = open_out(path);
    out << "i,j,x\n";
    const EdgeIndexMap idx(x.n);
    for (std::size_t k = 0; k < x.m(); ++k) {
        auto [i, j] = idx.nodes(k);
        out << i + 1 << "," << j + 1 << "," << x.values[k] << "\n";
    }
}

ObservationMatrix read_observation_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "i,j,x")
        throw ParseError(path + ": expected header 'i,j,x'");

    struct Row {
        int i, j;
        double x;
    };
    std::vector<Row> rows;
    int n = 0;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto parts = split(line, ',');
        if (parts.size() != 3)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected 3 fields");
        Row r{};
        try {
            r.i = std::stoi(parts[0]);
            r.j = std::stoi(parts[1]);
            r.x = std::stod(parts[2]);
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad number");
        }
        if (r.i < 1 || r.j <= r.i)
            throw ParseError(path + ":" + std::to_string(lineno) + ": need 1 <= i < j");
        n = std::max(n, r.j);
        rows.push_back(r);
    }
    if (n < 2) throw ParseError(path + ": no edges");
    const EdgeIndexMap idx(n);
    if (rows.size() != idx.m())
        throw ParseError(path + ": expected " + std::to_string(idx.m()) + " rows, got " +
                         std::to_string(rows.size()));
    ObservationMatrix x(n);
    std::vector<bool> seen(idx.m(), false);
    for (const auto& r : rows) {
        const std::size_t k = idx.index(r.i - 1, r.j - 1);
        if (seen[k])
            throw ParseError(path + ": duplicate pair (" + std::to_string(r.i) + "," +
                             std::to_string(r.j) + ")");
        seen[k] = true;
        x.values[k] = r.x;
    }
    return x;
}

void write_adjacency_csv(const std::string& path, const Adjacency& a) {
    auto out = open_out(path);
    out << "i,j\n";
    const EdgeIndexMap idx(a.n);
    for (std::size_t k = 0; k < a.m(); ++k) {
        if (!a.edges[k]) continue;
        auto [i, j] = idx.nodes(k);
        out << i + 1 << "," << j + 1 << "\n";
    }
}

Adjacency read_adjacency_csv(const std::string& path, int n) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "i,j")
        throw ParseError(path + ": expected header 'i,j'");
    Adjacency a(n);
    const EdgeIndexMap idx(n);
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto parts = split(line, ',');
        if (parts.size() != 2) throw ParseError(path + ": expected 2 fields");
        const int i = std::stoi(parts[0]), j = std::stoi(parts[1]);
        a.edges[idx.index(i - 1, j - 1)] = 1;
    }
    return a;
}

void write_labels_csv(const std::string& path, const std::vector<int>& z) {
    auto out = open_out(path);
    out << "i,z\n";
    for (std::size_t i = 0; i < z.size(); ++i) out << i + 1 << "," << z[i] + 1 << "\n";
}

void write_fit_json(const std::string& path, const SelectQResult& sel, int n) {
    const FitResult& best = *sel.fits[sel.best_q - 1];
    json icl_table = json::array();
    for (std::size_t q = 0; q < sel.fits.size(); ++q) {
        if (sel.fits[q])
            icl_table.push_back({{"Q", q + 1}, {"icl", sel.fits[q]->icl}});
        else
            icl_table.push_back({{"Q", q + 1}, {"icl", nullptr}});
    }
    std::vector<int> z1(best.z_hat.size());
    for (std::size_t i = 0; i < z1.size(); ++i) z1[i] = best.z_hat[i] + 1;
    json j{{"n", n},
           {"Q_hat", sel.best_q},
           {"theta", theta_to_json(best.theta_hat)},
           {"z_hat", z1},
           {"j_trace", best.j_trace},
           {"converged", best.converged},
           {"icl", best.icl},
           {"icl_table", icl_table}};
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

LoadedFit read_fit_json(const std::string& path) {
    auto in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& ex) {
        throw ParseError(path + ": " + ex.what());
    }
    LoadedFit lf;
    lf.n = j.at("n").get<int>();
    lf.best_q = j.at("Q_hat").get<int>();
    lf.fit.theta_hat = theta_from_json(j.at("theta"));
    for (int z : j.at("z_hat").get<std::vector<int>>()) lf.fit.z_hat.push_back(z - 1);
    lf.fit.j_trace = j.at("j_trace").get<std::vector<double>>();
    lf.fit.converged = j.at("converged").get<bool>();
    lf.fit.icl = j.at("icl").get<double>();
    return lf;
}

void write_decisions_csv(const std::string& path, const ObservationMatrix& x,
                         const std::vector<double>& l_vals, const DecisionMatrix& dec) {
    auto out = open_out(path);
    out << "i,j,x,l_value,q_value,rejected\n";
    const EdgeIndexMap idx(x.n);
    for (std::size_t k = 0; k < x.m(); ++k) {
        auto [i, j] = idx.nodes(k);
        out << i + 1 << "," << j + 1 << "," << x.values[k] << "," << l_vals[k] << ","
            << dec.q_values[k] << "," << int(dec.rejected[k]) << "\n";
    }
}

void write_benchmark_csv(const std::string& path,
                         const std::vector<BenchmarkRecord>& records) {
    auto out = open_out(path);
    out << "scenario,procedure,alpha,fdr,tdr,mfdr,fdr_se,tdr_se,reps,failures\n";
    for (const auto& r : records) {
        out << r.scenario << "," << r.procedure << "," << r.alpha << "," << r.fdr << ","
            << r.tdr << "," << r.mfdr << "," << r.fdr_se << "," << r.tdr_se << "," << r.reps
            << "," << r.failures << "\n";
    }
}

std::vector<BenchmarkRecord> read_benchmark_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) ||
        trim(line) != "scenario,procedure,alpha,fdr,tdr,mfdr,fdr_se,tdr_se,reps,failures")
        throw ParseError(path + ": bad benchmark header");
    std::vector<BenchmarkRecord> out;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto p = split(line, ',');
        if (p.size() != 10) throw ParseError(path + ": expected 10 fields");
        BenchmarkRecord r;
        r.scenario = p[0];
        r.procedure = p[1];
        r.alpha = std::stod(p[2]);
        r.fdr = std::stod(p[3]);
        r.tdr = std::stod(p[4]);
        r.mfdr = std::stod(p[5]);
        r.fdr_se = std::stod(p[6]);
        r.tdr_se = std::stod(p[7]);
        r.reps = std::stoi(p[8]);
        r.failures = std::stoi(p[9]);
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

std::vector<double> parse_list(const std::string& v) {
    std::vector<double> out;
    for (const auto& s : split(v, ',')) out.push_back(std::stod(trim(s)));
    return out;
}

QTable list_to_table(const std::vector<double>& v, int Q, const std::string& key) {
    if (static_cast<int>(v.size()) == 1) return QTable(Q, v[0]);
    if (static_cast<int>(v.size()) != Q * Q)
        throw ParseError(key + ": expected 1 or Q*Q values");
    QTable t(Q, 0.0);
    for (int q = 0; q < Q; ++q)
        for (int l = 0; l < Q; ++l) t.set(q, l, v[q * Q + l]);
    if (!t.symmetric(1e-12)) throw ParseError(key + ": table not symmetric");
    return t;
}

void apply_key(ScenarioConfig& cfg, const std::string& key, const std::string& value,
               std::size_t lineno) {
    try {
        if (key == "name") cfg.name = value;
        else if (key == "kind") cfg.graph.kind = graph_kind_from_string(value);
        else if (key == "n") cfg.graph.n = std::stoi(value);
        else if (key == "m_edges") cfg.graph.M = std::stoul(value);
        else if (key == "p") cfg.graph.p = std::stod(value);
        else if (key == "edges_per_node") cfg.graph.edges_per_node = std::stoi(value);
        else if (key == "n0") cfg.graph.n0 = std::stoi(value);
        else if (key == "p0") cfg.graph.p0 = std::stod(value);
        else if (key == "q") cfg.theta.Q = std::stoi(value);
        else if (key == "pi") cfg.theta.pi = parse_list(value);
        else if (key == "w") cfg.theta.w = list_to_table(parse_list(value), cfg.theta.Q, key);
        else if (key == "sigma0") cfg.theta.sigma0 = std::stod(value);
        else if (key == "mu") cfg.theta.mu = list_to_table(parse_list(value), cfg.theta.Q, key);
        else if (key == "sigma")
            cfg.theta.sigma = list_to_table(parse_list(value), cfg.theta.Q, key);
        else if (key == "noise_sigma0") cfg.noise.sigma0 = std::stod(value);
        else if (key == "noise_mu") cfg.noise.mu1 = std::stod(value);
        else if (key == "noise_sigma") cfg.noise.sigma1 = std::stod(value);
        else if (key == "alphas") cfg.alphas = parse_list(value);
        else if (key == "reps") cfg.reps = std::stoi(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "procedures") {
            cfg.procedures.clear();
            for (const auto& s : split(value, ',')) cfg.procedures.push_back(trim(s));
        } else if (key == "qmax") cfg.qmax = std::stoi(value);
        else if (key == "restarts") cfg.fit.restarts = std::stoi(value);
        else if (key == "max_vem_iters") cfg.fit.max_vem_iters = std::stoi(value);
        else if (key == "max_fixedpoint_iters") cfg.fit.max_fixedpoint_iters = std::stoi(value);
        else if (key == "rel_tol") cfg.fit.rel_tol = std::stod(value);
        else if (key == "damping") cfg.fit.damping = std::stod(value);
        else if (key == "sigma2_floor") cfg.fit.sigma2_floor = std::stod(value);
        else if (key == "workers") cfg.workers = std::stoi(value);
        else throw ParseError("unknown key '" + key + "'");
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
}

}  // namespace

std::vector<ScenarioConfig> parse_scenario_configs(const std::string& path) {
    auto in = open_in(path);
    std::vector<ScenarioConfig> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t == "[scenario]") {
            out.emplace_back();
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected key = value");
        if (out.empty()) out.emplace_back();
        apply_key(out.back(), trim(t.substr(0, eq)), trim(t.substr(eq + 1)), lineno);
    }
    if (out.empty()) throw ParseError(path + ": no scenarios");
    for (auto& cfg : out) {
        if (cfg.graph.kind == GraphKind::nsbm) validate_theta(cfg.theta);
        if (cfg.graph.n < 2) throw ParseError(path + ": scenario needs n >= 2");
    }
    return out;
}

std::string format_scenario_config(const ScenarioConfig& cfg) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "[scenario]\n";
    os << "name = " << cfg.name << "\n";
    os << "kind = " << to_string(cfg.graph.kind) << "\n";
    os << "n = " << cfg.graph.n << "\n";
    if (cfg.graph.kind == GraphKind::nsbm) {
        os << "q = " << cfg.theta.Q << "\n";
        os << "pi = ";
        for (std::size_t i = 0; i < cfg.theta.pi.size(); ++i)
            os << (i ? "," : "") << cfg.theta.pi[i];
        os << "\n";
        auto dump_table = [&](const char* key, const QTable& t) {
            os << key << " = ";
            for (int q = 0; q < t.size(); ++q)
                for (int l = 0; l < t.size(); ++l)
                    os << ((q + l) ? "," : "") << t(q, l);
            os << "\n";
        };
        dump_table("w", cfg.theta.w);
        os << "sigma0 = " << cfg.theta.sigma0 << "\n";
        dump_table("mu", cfg.theta.mu);
        dump_table("sigma", cfg.theta.sigma);
    } else {
        if (cfg.graph.kind == GraphKind::erdos_renyi_M) os << "m_edges = " << cfg.graph.M << "\n";
        if (cfg.graph.kind == GraphKind::bipartite) os << "p = " << cfg.graph.p << "\n";
        if (cfg.graph.kind == GraphKind::preferential_attachment) {
            os << "edges_per_node = " << cfg.graph.edges_per_node << "\n";
            os << "n0 = " << cfg.graph.n0 << "\n";
            os << "p0 = " << cfg.graph.p0 << "\n";
        }
        os << "noise_sigma0 = " << cfg.noise.sigma0 << "\n";
        os << "noise_mu = " << cfg.noise.mu1 << "\n";
        os << "noise_sigma = " << cfg.noise.sigma1 << "\n";
    }
    os << "alphas = ";
    for (std::size_t i = 0; i < cfg.alphas.size(); ++i) os << (i ? "," : "") << cfg.alphas[i];
    os << "\n";
    os << "reps = " << cfg.reps << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "procedures = ";
    for (std::size_t i = 0; i < cfg.procedures.size(); ++i)
        os << (i ? "," : "") << cfg.procedures[i];
    os << "\n";
    os << "qmax = " << cfg.qmax << "\n";
    os << "restarts = " << cfg.fit.restarts << "\n";
    os << "max_vem_iters = " << cfg.fit.max_vem_iters << "\n";
    os << "max_fixedpoint_iters = " << cfg.fit.max_fixedpoint_iters << "\n";
    os << "rel_tol = " << cfg.fit.rel_tol << "\n";
    os << "damping = " << cfg.fit.damping << "\n";
    os << "sigma2_floor = " << cfg.fit.sigma2_floor << "\n";
    os << "workers = " << cfg.workers << "\n";
    return os.str();
}

}  // namespace nsbm
