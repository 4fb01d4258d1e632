#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "iscc/inner_solver.hpp"

namespace iscc {

enum class SchemeId { LocalOnly, EdDp, CedWdp, Exhaustive, ProposedCE };

/// CLI names: local, ed-dp, ced-wdp, exhaustive, proposed.
std::string to_string(SchemeId id);
SchemeId parse_scheme(std::string_view name);
std::vector<SchemeId> all_schemes();

/// Thrown when a joint enumeration would exceed the evaluation budget.
class BudgetError : public std::runtime_error {
public:
    BudgetError(const std::string& what, double required) : std::runtime_error(what), required_(required) {}
    double required() const { return required_; }

private:
    double required_;
};

struct BaselineOptions {
    double exhaustive_budget = 1e6;  // joint evaluations
    bool restrict_l1_ge_1 = false;
    int ced_wdp_max_exhaustive_devices = 12;
    int workers = 1;
};

struct SchemeResult {
    InnerSolution solution;
    std::uint64_t evaluations = 0;
    bool exact = true;  // false when a heuristic (coordinate descent) was used
};

/// Every device at (L, L).
SchemeResult run_local_only(const InnerSolver& inner);

/// Device/edge split (l1, L) for every device, joint choice by coordinate
/// descent starting from all-local.
SchemeResult run_ed_dp(const InnerSolver& inner, const BaselineOptions& opts = {});

/// Same decision space as run_ed_dp, searched exhaustively.
SchemeResult run_ed_dp_exhaustive(const InnerSolver& inner, const BaselineOptions& opts = {});

/// Whole-model placement: each device picks local (L, L), edge (0, L) or
/// cloud (0, 0). Exhaustive up to the device limit, else coordinate descent.
SchemeResult run_ced_wdp(const InnerSolver& inner, const BaselineOptions& opts = {});

/// Global optimum over all pair assignments. Ties resolve to the
/// lexicographically smallest assignment.
SchemeResult run_exhaustive(const InnerSolver& inner, const BaselineOptions& opts = {});

/// Best assignment from the cartesian product of per-device option lists.
/// Deterministic for any worker count.
SchemeResult search_product(const InnerSolver& inner, const std::vector<std::vector<PartitionPair>>& options,
                            int workers);

/// Coordinate descent over the same product: sweeps devices in order, moving
/// each to its best option with the others fixed, until a sweep changes
/// nothing.
SchemeResult coordinate_descent(const InnerSolver& inner, const std::vector<std::vector<PartitionPair>>& options,
                                std::vector<std::size_t> start);

}  // namespace iscc
