#include "iscc/baselines.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "iscc/util.hpp"

namespace iscc {

std::string to_string(SchemeId id) {
    switch (id) {
        case SchemeId::LocalOnly: return "local";
        case SchemeId::EdDp: return "ed-dp";
        case SchemeId::CedWdp: return "ced-wdp";
        case SchemeId::Exhaustive: return "exhaustive";
        case SchemeId::ProposedCE: return "proposed";
    }
    return "?";
}

SchemeId parse_scheme(std::string_view name) {
    for (auto id : all_schemes())
        if (to_string(id) == name) return id;
    throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

std::vector<SchemeId> all_schemes() {
    return {SchemeId::LocalOnly, SchemeId::EdDp, SchemeId::CedWdp, SchemeId::Exhaustive, SchemeId::ProposedCE};
}

namespace {

struct Best {
    double objective = std::numeric_limits<double>::infinity();
    bool feasible = false;
    std::uint64_t index = std::numeric_limits<std::uint64_t>::max();

    bool beats(double obj, bool feas) const {
        if (feas != feasible) return feas;
        return obj < objective;
    }
};

std::vector<PartitionPair> decode(const std::vector<std::vector<PartitionPair>>& options, std::uint64_t index) {
    std::vector<PartitionPair> a(options.size());
    for (std::size_t k = options.size(); k-- > 0;) {
        const auto n = options[k].size();
        a[k] = options[k][index % n];
        index /= n;
    }
    return a;
}

std::vector<PartitionPair> pick(const std::vector<std::vector<PartitionPair>>& options,
                                const std::vector<std::size_t>& idx) {
    std::vector<PartitionPair> a(options.size());
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = options[k][idx[k]];
    return a;
}

std::vector<std::vector<PartitionPair>> replicate(const std::vector<PartitionPair>& opts, int devices) {
    return std::vector<std::vector<PartitionPair>>(static_cast<std::size_t>(devices), opts);
}

}  // namespace

SchemeResult search_product(const InnerSolver& inner, const std::vector<std::vector<PartitionPair>>& options,
                            int workers) {
    std::uint64_t total = 1;
    for (const auto& o : options) {
        if (o.empty()) throw std::invalid_argument("empty option list");
        total *= o.size();
    }
    const std::size_t chunks = std::min<std::uint64_t>(total, static_cast<std::uint64_t>(std::max(1, workers)) * 16);
    std::vector<Best> local(chunks);
    parallel_for(chunks, workers, [&](std::size_t c) {
        const std::uint64_t lo = total * c / chunks;
        const std::uint64_t hi = total * (c + 1) / chunks;
        Best b;
        for (std::uint64_t i = lo; i < hi; ++i) {
            const auto a = decode(options, i);
            const auto ev = inner.evaluate(a);
            if (b.index == std::numeric_limits<std::uint64_t>::max() || b.beats(ev.objective, ev.feasible)) {
                b.objective = ev.objective;
                b.feasible = ev.feasible;
                b.index = i;
            }
        }
        local[c] = b;
    });
    // chunks are in index order, strict comparison keeps the lowest index
    Best best = local.front();
    for (std::size_t c = 1; c < chunks; ++c)
        if (best.beats(local[c].objective, local[c].feasible)) best = local[c];

    SchemeResult r;
    r.solution = inner.solve(decode(options, best.index));
    r.evaluations = total;
    return r;
}

SchemeResult coordinate_descent(const InnerSolver& inner, const std::vector<std::vector<PartitionPair>>& options,
                                std::vector<std::size_t> idx) {
    if (idx.size() != options.size()) throw std::invalid_argument("start point has wrong size");
    SchemeResult r;
    r.exact = options.size() <= 1;
    auto ev = inner.evaluate(pick(options, idx));
    ++r.evaluations;
    Best cur{ev.objective, ev.feasible, 0};
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t k = 0; k < options.size(); ++k) {
            const std::size_t keep = idx[k];
            std::size_t best_j = keep;
            for (std::size_t j = 0; j < options[k].size(); ++j) {
                if (j == keep) continue;
                idx[k] = j;
                const auto e = inner.evaluate(pick(options, idx));
                ++r.evaluations;
                if (cur.beats(e.objective, e.feasible)) {
                    cur.objective = e.objective;
                    cur.feasible = e.feasible;
                    best_j = j;
                }
            }
            idx[k] = best_j;
            if (best_j != keep) changed = true;
        }
    }
    r.solution = inner.solve(pick(options, idx));
    return r;
}

SchemeResult run_local_only(const InnerSolver& inner) {
    const int L = inner.profile().depth();
    const std::vector<PartitionPair> a(static_cast<std::size_t>(inner.devices()), PartitionPair{L, L});
    SchemeResult r;
    r.solution = inner.solve(a);
    r.evaluations = 1;
    return r;
}

namespace {

std::vector<PartitionPair> ed_dp_options(const InnerSolver& inner, const BaselineOptions& opts) {
    const int L = inner.profile().depth();
    std::vector<PartitionPair> o;
    for (int l1 = opts.restrict_l1_ge_1 ? 1 : 0; l1 <= L; ++l1) o.push_back({l1, L});
    return o;
}

}  // namespace

SchemeResult run_ed_dp(const InnerSolver& inner, const BaselineOptions& opts) {
    const auto o = ed_dp_options(inner, opts);
    const std::vector<std::size_t> start(static_cast<std::size_t>(inner.devices()), o.size() - 1);
    return coordinate_descent(inner, replicate(o, inner.devices()), start);
}

SchemeResult run_ed_dp_exhaustive(const InnerSolver& inner, const BaselineOptions& opts) {
    const auto o = ed_dp_options(inner, opts);
    const double n = std::pow(static_cast<double>(o.size()), inner.devices());
    if (n > opts.exhaustive_budget) {
        std::ostringstream msg;
        msg << "restricted search needs " << n << " evaluations, budget is " << opts.exhaustive_budget;
        throw BudgetError(msg.str(), n);
    }
    return search_product(inner, replicate(o, inner.devices()), opts.workers);
}

SchemeResult run_ced_wdp(const InnerSolver& inner, const BaselineOptions& opts) {
    const int L = inner.profile().depth();
    // order: local, edge, cloud
    const std::vector<PartitionPair> o{{L, L}, {0, L}, {0, 0}};
    const auto options = replicate(o, inner.devices());
    if (inner.devices() <= opts.ced_wdp_max_exhaustive_devices) return search_product(inner, options, opts.workers);
    std::clog << "warning: ced-wdp with " << inner.devices()
              << " devices exceeds the exhaustive limit; using coordinate descent\n";
    return coordinate_descent(inner, options, std::vector<std::size_t>(options.size(), 0));
}

SchemeResult run_exhaustive(const InnerSolver& inner, const BaselineOptions& opts) {
    std::vector<PartitionPair> o;
    for (const auto& p : enumerate_partitions(inner.profile()))
        if (!opts.restrict_l1_ge_1 || p.l1 >= 1) o.push_back(p);
    const double n = std::pow(static_cast<double>(o.size()), inner.devices());
    if (n > opts.exhaustive_budget) {
        std::ostringstream msg;
        msg << "exhaustive search needs " << o.size() << "^" << inner.devices() << " = " << n
            << " evaluations, budget is " << opts.exhaustive_budget;
        throw BudgetError(msg.str(), n);
    }
    return search_product(inner, replicate(o, inner.devices()), opts.workers);
}

}  // namespace iscc
