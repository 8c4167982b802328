#include "sclp/model.hpp"
#include "sclp/io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace sclp {

const Tolerances& default_tolerances() {
    static const Tolerances tol;
    return tol;
}

std::vector<std::string> validate(const FluidNetwork& net) {
    std::vector<std::string> out;
    const int I = net.I(), K = net.K(), J = net.J();
    auto flow_name = [](int j) { return "flow " + std::to_string(j + 1); };

    if (I <= 0) out.push_back("num_servers must be positive");
    if (K <= 0) out.push_back("buffers must be non-empty");
    if (J <= 0) out.push_back("flows must be non-empty");
    if (!(net.horizon > 0)) out.push_back("horizon must be positive");
    if (static_cast<int>(net.budgets.size()) != I)
        out.push_back("budgets has " + std::to_string(net.budgets.size()) + " entries, expected " +
                      std::to_string(I));

    std::vector<int> per_server(std::max(I, 0), 0);
    for (int j = 0; j < J; ++j) {
        const Flow& f = net.flows[j];
        bool server_ok = f.server >= 0 && f.server < I;
        if (!server_ok) out.push_back(flow_name(j) + ": server index out of range");
        else ++per_server[f.server];
        if (f.buffer < 0 || f.buffer >= K) out.push_back(flow_name(j) + ": buffer index out of range");
        if (!(f.mu_bar > 0)) out.push_back(flow_name(j) + ": nominal_rate must be positive");
        if (f.mu_tilde < 0) out.push_back(flow_name(j) + ": rate_deviation must be nonnegative");
        if (f.mu_tilde > f.mu_bar) out.push_back("rate_deviation exceeds nominal_rate for " + flow_name(j));
        double total = 0;
        for (auto [to, p] : f.routing) {
            if (to < 0 || to >= K) out.push_back(flow_name(j) + ": routing target out of range");
            if (to == f.buffer) out.push_back(flow_name(j) + ": routing map contains its own buffer");
            if (p < 0 || p > 1) out.push_back(flow_name(j) + ": routing proportion outside [0,1]");
            total += p;
        }
        if (total > 1 + 1e-12) out.push_back(flow_name(j) + ": routing proportions sum above 1");
    }
    for (int k = 0; k < K; ++k) {
        const Buffer& b = net.buffers[k];
        std::string name = "buffer " + std::to_string(k + 1);
        if (b.alpha < 0) out.push_back(name + ": initial_level must be nonnegative");
        if (b.input_rate < 0) out.push_back(name + ": input_rate must be nonnegative");
        if (b.holding_cost < 0) out.push_back(name + ": holding_cost must be nonnegative");
    }
    for (int i = 0; i < I; ++i) {
        std::string name = "server " + std::to_string(i + 1);
        if (i < static_cast<int>(net.budgets.size())) {
            double g = net.budgets[i];
            if (g < 0 || g > per_server[i])
                out.push_back(name + ": budget " + std::to_string(g) + " outside [0, " +
                              std::to_string(per_server[i]) + "]");
        }
    }
    return out;
}

SclpData build_matrices(const FluidNetwork& net) {
    auto diag = validate(net);
    if (!diag.empty()) {
        std::ostringstream os;
        os << "invalid network:";
        for (auto& d : diag) os << "\n  " << d;
        throw InputError(os.str());
    }
    const int I = net.I(), K = net.K(), J = net.J();
    SclpData d;
    d.G = Mat::Zero(K, J);
    d.H = Mat::Zero(I, J);
    d.server.resize(J);
    for (int j = 0; j < J; ++j) {
        const Flow& f = net.flows[j];
        d.G(f.buffer, j) = 1.0;
        for (auto [to, p] : f.routing) d.G(to, j) -= p;
        d.H(f.server, j) = 1.0;
        d.server[j] = f.server;
    }
    d.g.resize(K);
    d.alpha.resize(K);
    d.a.resize(K);
    for (int k = 0; k < K; ++k) {
        d.g(k) = net.buffers[k].holding_cost;
        d.alpha(k) = net.buffers[k].alpha;
        d.a(k) = net.buffers[k].input_rate;
    }
    Vec mu_bar(J), mu_tilde(J);
    for (int j = 0; j < J; ++j) {
        mu_bar(j) = net.flows[j].mu_bar;
        mu_tilde(j) = net.flows[j].mu_tilde;
    }
    d.c = d.G.transpose() * d.g;
    d.G_bar = d.G * mu_bar.asDiagonal();
    d.G_tilde = -(d.G * mu_tilde.asDiagonal());
    d.c_bar = d.c.cwiseProduct(mu_bar);
    d.c_tilde = d.c.cwiseProduct(mu_tilde);
    d.F = Mat::Zero(K, 0);
    d.d = Vec::Zero(0);
    d.b = Vec::Ones(I);
    d.gamma = Vec::Zero(J);
    d.T = net.horizon;
    d.budgets = net.budgets;
    return d;
}

SclpProblem SclpData::nominal() const {
    SclpProblem p;
    p.G = G_bar;
    p.F = F;
    p.H = H;
    p.alpha = alpha;
    p.a = a;
    p.b = b;
    p.c = c_bar;
    p.gamma = gamma;
    p.d = d;
    p.T = T;
    return p;
}

bool SclpData::has_uncertainty() const {
    return G_tilde.cwiseAbs().maxCoeff() > 0 || (c_tilde.size() && c_tilde.cwiseAbs().maxCoeff() > 0);
}

// ---- JSON ----

using nlohmann::json;

json vec_to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json mat_to_json(const Mat& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        a.push_back(row);
    }
    return a;
}

Vec vec_from_json(const json& j) {
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
    return v;
}

Mat mat_from_json(const json& j, int cols_if_empty) {
    if (j.empty()) return Mat::Zero(0, cols_if_empty);
    Mat m(j.size(), j[0].size());
    for (size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != j[0].size()) throw InputError("ragged matrix row " + std::to_string(r));
        for (size_t c = 0; c < j[r].size(); ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

namespace {

std::string id_key(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw InputError("ids must be strings or integers, got " + v.dump());
}

template <class T>
T field(const json& obj, const char* name, const std::string& where) {
    if (!obj.contains(name)) throw InputError(where + ": missing field '" + name + "'");
    try {
        return obj.at(name).get<T>();
    } catch (const json::exception& e) {
        throw InputError(where + ": field '" + name + "' has wrong type (" + e.what() + ")");
    }
}

}  // namespace

namespace {

FluidNetwork parse_network(const json& j) {
    if (!j.is_object()) throw InputError("problem file: top level must be an object");
    for (const char* key : {"servers", "buffers", "flows", "horizon"})
        if (!j.contains(key)) throw InputError(std::string("problem file: missing top-level key '") + key + "'");

    FluidNetwork net;
    std::map<std::string, int> server_idx, buffer_idx;
    const json& servers = j["servers"];
    for (size_t i = 0; i < servers.size(); ++i) {
        std::string where = "servers[" + std::to_string(i) + "]";
        server_idx[id_key(servers[i].at("id"))] = static_cast<int>(i);
        net.budgets.push_back(servers[i].value("budget", 0.0));
    }
    net.num_servers = static_cast<int>(servers.size());

    const json& buffers = j["buffers"];
    for (size_t k = 0; k < buffers.size(); ++k) {
        std::string where = "buffers[" + std::to_string(k) + "]";
        if (!buffers[k].contains("id")) throw InputError(where + ": missing field 'id'");
        buffer_idx[id_key(buffers[k]["id"])] = static_cast<int>(k);
        Buffer b;
        b.alpha = field<double>(buffers[k], "alpha", where);
        b.input_rate = buffers[k].value("input_rate", 0.0);
        b.holding_cost = buffers[k].value("holding_cost", 0.0);
        net.buffers.push_back(b);
    }

    auto lookup = [](const std::map<std::string, int>& m, const json& v, const std::string& where) {
        auto it = m.find(id_key(v));
        if (it == m.end()) throw InputError(where + ": unknown id " + v.dump());
        return it->second;
    };

    const json& flows = j["flows"];
    for (size_t f = 0; f < flows.size(); ++f) {
        std::string where = "flows[" + std::to_string(f) + "]";
        const json& fj = flows[f];
        if (!fj.contains("server") || !fj.contains("buffer"))
            throw InputError(where + ": flows need 'server' and 'buffer'");
        Flow fl;
        fl.server = lookup(server_idx, fj["server"], where + ".server");
        fl.buffer = lookup(buffer_idx, fj["buffer"], where + ".buffer");
        fl.mu_bar = field<double>(fj, "mu_bar", where);
        fl.mu_tilde = fj.value("mu_tilde", 0.0);
        fl.cost = fj.value("cost", 0.0);
        if (fj.contains("routing")) {
            for (size_t r = 0; r < fj["routing"].size(); ++r) {
                const json& rj = fj["routing"][r];
                std::string rw = where + ".routing[" + std::to_string(r) + "]";
                fl.routing.emplace_back(lookup(buffer_idx, rj.at("to"), rw), field<double>(rj, "p", rw));
            }
        }
        net.flows.push_back(fl);
    }
    net.horizon = j["horizon"].get<double>();
    return net;
}

}  // namespace

FluidNetwork network_from_json(const json& j) {
    try {
        return parse_network(j);
    } catch (const json::exception& e) {
        throw InputError(std::string("problem file: ") + e.what());
    }
}

json network_to_json(const FluidNetwork& net) {
    json j;
    j["servers"] = json::array();
    for (int i = 0; i < net.I(); ++i) j["servers"].push_back({{"id", i + 1}, {"budget", net.budgets[i]}});
    j["buffers"] = json::array();
    for (int k = 0; k < net.K(); ++k) {
        const Buffer& b = net.buffers[k];
        j["buffers"].push_back(
            {{"id", k + 1}, {"alpha", b.alpha}, {"input_rate", b.input_rate}, {"holding_cost", b.holding_cost}});
    }
    j["flows"] = json::array();
    for (int f = 0; f < net.J(); ++f) {
        const Flow& fl = net.flows[f];
        json r = json::array();
        for (auto [to, p] : fl.routing) r.push_back({{"to", to + 1}, {"p", p}});
        j["flows"].push_back({{"id", f + 1},
                              {"server", fl.server + 1},
                              {"buffer", fl.buffer + 1},
                              {"mu_bar", fl.mu_bar},
                              {"mu_tilde", fl.mu_tilde},
                              {"routing", r}});
    }
    j["horizon"] = net.horizon;
    return j;
}

FluidNetwork load_network(const std::string& path) { return network_from_json(io::read_json(path)); }

void save_network(const FluidNetwork& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << network_to_json(net).dump(2) << "\n";
}

json problem_to_json(const SclpProblem& p) {
    return {{"G", mat_to_json(p.G)}, {"F", mat_to_json(p.F)},     {"H", mat_to_json(p.H)},
            {"alpha", vec_to_json(p.alpha)}, {"a", vec_to_json(p.a)}, {"b", vec_to_json(p.b)},
            {"c", vec_to_json(p.c)},         {"gamma", vec_to_json(p.gamma)},
            {"d", vec_to_json(p.d)},         {"T", p.T}};
}

SclpProblem problem_from_json(const json& j) {
    SclpProblem p;
    p.G = mat_from_json(j.at("G"));
    p.H = mat_from_json(j.at("H"), static_cast<int>(p.G.cols()));
    p.F = j.contains("F") ? mat_from_json(j["F"]) : Mat::Zero(p.G.rows(), 0);
    if (p.F.rows() == 0) p.F = Mat::Zero(p.G.rows(), p.F.cols());
    p.alpha = vec_from_json(j.at("alpha"));
    p.a = vec_from_json(j.at("a"));
    p.b = vec_from_json(j.at("b"));
    p.c = vec_from_json(j.at("c"));
    p.gamma = j.contains("gamma") ? vec_from_json(j["gamma"]) : Vec::Zero(p.G.cols());
    p.d = j.contains("d") ? vec_from_json(j["d"]) : Vec::Zero(p.F.cols());
    p.T = j.at("T").get<double>();
    return p;
}

}  // namespace sclp
