#include "sclp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

namespace sclp::bench {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void ExperimentConfig::check() const {
    if (reps < 1) throw InputError("bench config: reps must be at least 1");
    if (iota.empty() || m.empty() || theta.empty() || kappa.empty()) throw InputError("bench config: empty grid axis");
    for (int v : iota)
        if (v < 1) throw InputError("bench config: iota must be positive");
    for (int v : m)
        if (v < 1) throw InputError("bench config: m must be positive");
    for (double t : theta)
        if (!(t > 0 && t <= 1)) throw InputError("bench config: theta must lie in (0, 1]");
    for (double k : kappa)
        if (!(k >= 0 && k <= 1)) throw InputError("bench config: kappa must lie in [0, 1]");
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        if (j.contains("iota")) c.iota = j.at("iota").get<std::vector<int>>();
        if (j.contains("m")) c.m = j.at("m").get<std::vector<int>>();
        if (j.contains("theta")) c.theta = j.at("theta").get<std::vector<double>>();
        if (j.contains("kappa")) c.kappa = j.at("kappa").get<std::vector<double>>();
        c.reps = j.value("reps", c.reps);
        c.seed = j.value("seed", c.seed);
        c.threads = j.value("threads", c.threads);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bench config: ") + e.what());
    }
    c.check();
    return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    return {{"iota", c.iota}, {"m", c.m},       {"theta", c.theta},    {"kappa", c.kappa},
            {"reps", c.reps}, {"seed", c.seed}, {"threads", c.threads}};
}

FluidNetwork generate_random(const GridPoint& pt, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int I = 10 * pt.iota;
    const int K = 2 * pt.m * I;
    FluidNetwork net;
    net.num_servers = I;
    net.buffers.resize(K);
    std::uniform_real_distribution<double> U(0, 1);
    std::uniform_int_distribution<int> srv(0, I - 1);
    const int nmax = std::min(K - 1, std::max(1, static_cast<int>(std::ceil(pt.theta * K - 1e-9))));
    std::uniform_int_distribution<int> ndraw(1, nmax);
    IndexList others(K - 1);
    for (int k = 0; k < K; ++k) {
        net.buffers[k].alpha = 1.0 + U(rng);
        net.buffers[k].holding_cost = 1.0;
    }
    for (int j = 0; j < K; ++j) {
        Flow f;
        f.buffer = j;
        f.server = srv(rng);
        f.mu_bar = 1.0 + U(rng);
        f.mu_tilde = f.mu_bar * (0.1 + 0.4 * U(rng));
        const int n = ndraw(rng);
        for (int t = 0, k = 0; k < K; ++k)
            if (k != j) others[t++] = k;
        // partial Fisher-Yates: first n entries are a uniform n-subset
        for (int t = 0; t < n; ++t) {
            std::uniform_int_distribution<int> pick(t, K - 2);
            std::swap(others[t], others[pick(rng)]);
        }
        const double share = 1.0 / (n + 1);
        for (int t = 0; t < n; ++t) f.routing.push_back({others[t], share});
        std::sort(f.routing.begin(), f.routing.end());
        net.flows.push_back(std::move(f));
    }
    std::vector<int> per(I, 0);
    for (const auto& f : net.flows) ++per[f.server];
    net.budgets.resize(I);
    for (int i = 0; i < I; ++i) net.budgets[i] = pt.kappa * per[i];
    net.horizon = 1.0;
    return net;
}

double DimensionCounts::relative_reduction() const {
    if (before == 0) return 100.0;
    return 100.0 * (1.0 - static_cast<double>(after) / static_cast<double>(before));
}

DimensionCounts count_dimensions(const FluidNetwork& net, bool objective_uncertainty) {
    const long long I = net.I(), K = net.K(), J = net.J();
    DimensionCounts d;
    d.eq2_form = (K + 1) * (J + I) + 1;
    d.no_routing = K * (K + I);
    d.before = K * (J + I) + (objective_uncertainty ? J + I : 0);
    // (k, i) -> number of flows on server i with positive G_tilde in row k
    std::vector<long long> block(static_cast<size_t>(K * I), 0);
    std::vector<long long> block0(I, 0);
    std::vector<double> col(K, 0.0);
    IndexList touched;
    for (const auto& f : net.flows) {
        if (f.mu_tilde <= 0) continue;
        touched.clear();
        auto add = [&](int k, double v) {
            if (col[k] == 0.0) touched.push_back(k);
            col[k] += v;
        };
        add(f.buffer, 1.0);
        for (auto [to, p] : f.routing) add(to, -p);
        double c = 0;
        for (int k : touched) {
            if (-col[k] * f.mu_tilde > 0) ++block[static_cast<size_t>(k) * I + f.server];
            c += col[k] * net.buffers[k].holding_cost;
            col[k] = 0.0;
        }
        if (objective_uncertainty && c * f.mu_tilde > 0) ++block0[f.server];
    }
    for (long long k = 0; k < K; ++k)
        for (long long i = 0; i < I; ++i) {
            const long long n = block[k * I + i];
            if (n > 0 && n > net.budgets[i]) d.after += 1 + n;
        }
    if (objective_uncertainty)
        for (int i = 0; i < I; ++i)
            if (block0[i] > net.budgets[i]) d.after += 1 + block0[i];
    return d;
}

std::vector<ResultRow> reduction_experiment(const ExperimentConfig& c) {
    c.check();
    std::vector<GridPoint> pts;
    for (int io : c.iota)
        for (int mm : c.m)
            for (double th : c.theta)
                for (double ka : c.kappa) pts.push_back({io, mm, th, ka});
    std::vector<ResultRow> rows(pts.size());
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t t; (t = next.fetch_add(1)) < pts.size();) {
            ResultRow r;
            r.pt = pts[t];
            r.reps = c.reps;
            std::vector<double> R;
            for (int rep = 0; rep < c.reps; ++rep) {
                std::uint64_t s = splitmix(c.seed ^ splitmix(t * 1000003ULL + rep));
                R.push_back(count_dimensions(generate_random(pts[t], s)).relative_reduction());
            }
            double mean = 0;
            for (double v : R) mean += v;
            mean /= R.size();
            double var = 0;
            for (double v : R) var += (v - mean) * (v - mean);
            r.mean_R = mean;
            r.std_R = R.size() > 1 ? std::sqrt(var / (R.size() - 1)) : 0.0;
            rows[t] = r;
        }
    };
    int nt = c.threads > 0 ? c.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    nt = std::min<int>(nt, static_cast<int>(pts.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    return rows;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    os << "iota,m,theta,kappa,rep_count,mean_R,std_R\n";
    for (const auto& r : rows)
        os << r.pt.iota << ',' << r.pt.m << ',' << g17(r.pt.theta) << ',' << g17(r.pt.kappa) << ',' << r.reps << ','
           << g17(r.mean_R) << ',' << g17(r.std_R) << '\n';
    return os.str();
}

void write_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw InputError("cannot write " + path);
    f << to_csv(rows);
}

FluidNetwork random_network(const SmallNetworkOptions& opt, std::uint64_t seed) {
    if (opt.I < 1 || opt.K < 1) throw InputError("random_network: need at least one server and one buffer");
    if (opt.K + opt.extra_flows < opt.I) throw InputError("random_network: fewer flows than servers");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0, 1);
    const int I = opt.I, K = opt.K, J = K + opt.extra_flows;
    FluidNetwork net;
    net.num_servers = I;
    net.buffers.resize(K);
    for (auto& b : net.buffers) {
        b.alpha = 0.5 + 1.5 * U(rng);
        b.input_rate = U(rng) < 0.4 ? 0.3 * U(rng) : 0.0;
        b.holding_cost = 1.0 + 2.0 * U(rng);
    }
    std::uniform_int_distribution<int> srv(0, I - 1), buf(0, K - 1);
    for (int j = 0; j < J; ++j) {
        Flow f;
        f.buffer = j < K ? j : buf(rng);
        f.server = j < I ? j : srv(rng);
        f.mu_bar = 1.0 + 2.0 * U(rng);
        f.mu_tilde = U(rng) < opt.uncertain_prob ? f.mu_bar * (0.1 + 0.4 * U(rng)) : 0.0;
        if (f.buffer + 1 < K && U(rng) < opt.routing_prob) {
            std::uniform_int_distribution<int> to(f.buffer + 1, K - 1);
            f.routing.push_back({to(rng), 0.3 + 0.7 * U(rng)});
        }
        net.flows.push_back(std::move(f));
    }
    std::vector<int> per(I, 0);
    for (const auto& f : net.flows) ++per[f.server];
    net.budgets.resize(I);
    for (int i = 0; i < I; ++i) {
        if (opt.fractional_budgets && U(rng) < 0.5) net.budgets[i] = per[i] * U(rng);
        else net.budgets[i] = std::uniform_int_distribution<int>(0, per[i])(rng);
    }
    if (opt.horizon > 0) {
        net.horizon = opt.horizon;
    } else {
        double load = 0, rate = 0;
        for (const auto& b : net.buffers) load += b.alpha;
        for (const auto& f : net.flows) rate += f.mu_bar;
        net.horizon = 1.5 * load / rate * J / I;
    }
    return net;
}

}  // namespace sclp::bench
