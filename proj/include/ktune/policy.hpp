#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ktune/common.hpp"
#include "ktune/ortho.hpp"
#include "ktune/solver_types.hpp"

namespace ktune {

enum class PolicyKind { time, accuracy, memory, stable };
enum class PrecondKind { none, ilu0 };
enum class SolverKind { auto_default, gmres, bicgstab, lanczos, arnoldi };

inline const char* policy_name(PolicyKind p) {
    switch (p) {
        case PolicyKind::time: return "TIME";
        case PolicyKind::accuracy: return "ACCURACY";
        case PolicyKind::memory: return "MEMORY";
        case PolicyKind::stable: return "STABLE";
    }
    return "?";
}

inline const char* solver_name(SolverKind s) {
    switch (s) {
        case SolverKind::auto_default: return "AUTO";
        case SolverKind::gmres: return "GMRES";
        case SolverKind::bicgstab: return "BICGSTAB";
        case SolverKind::lanczos: return "LANCZOS";
        case SolverKind::arnoldi: return "ARNOLDI";
    }
    return "?";
}

/// Parsed numerical-computation-policy file. Fields left at their defaults
/// when the file does not mention them; the default policy is TIME.
struct PolicyConfig {
    PolicyKind policy = PolicyKind::time;
    int cpu = 0;              // worker count; 0 = library default
    double residual = 1e-8;   // required accuracy
    std::size_t maxmemory = 0;  // bytes; 0 = library default budget
    double maxtime = 1000.0;    // seconds
    PrecondKind preconditioner = PrecondKind::none;
    SolverKind solver = SolverKind::auto_default;
    std::vector<std::string> warnings;  // unknown keywords, noted not fatal

    friend bool operator==(const PolicyConfig& a, const PolicyConfig& b) {
        return a.policy == b.policy && a.cpu == b.cpu && a.residual == b.residual &&
               a.maxmemory == b.maxmemory && a.maxtime == b.maxtime &&
               a.preconditioner == b.preconditioner && a.solver == b.solver;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

inline double parse_number(const std::string& key, const std::string& val) {
    try {
        std::size_t used = 0;
        const double v = std::stod(val, &used);
        require(used == val.size(), "trailing junk");
        return v;
    } catch (const std::exception&) {
        throw Error("policy: invalid numeric value for " + key + ": " + val);
    }
}

}  // namespace detail

/// Parses `KEYWORD = VALUE` lines. Keywords and enum values are
/// case-insensitive; `#`-prefixed lines are comments; unknown keywords are
/// collected as warnings and otherwise ignored; invalid values for known
/// keywords are errors.
inline PolicyConfig parse_policy_text(std::string_view text) {
    PolicyConfig cfg;
    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = detail::trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos,
                "policy: missing '=' on line " + std::to_string(lineno) + ": " + line);
        const std::string key = detail::upper(detail::trim(line.substr(0, eq)));
        const std::string val = detail::upper(detail::trim(line.substr(eq + 1)));
        require(!key.empty() && !val.empty(),
                "policy: malformed line " + std::to_string(lineno) + ": " + line);

        if (key == "POLICY") {
            if (val == "TIME")
                cfg.policy = PolicyKind::time;
            else if (val == "ACCURACY")
                cfg.policy = PolicyKind::accuracy;
            else if (val == "MEMORY")
                cfg.policy = PolicyKind::memory;
            else if (val == "STABLE")
                cfg.policy = PolicyKind::stable;
            else
                throw Error("policy: POLICY must be TIME / ACCURACY / MEMORY / STABLE, got " +
                            val);
        } else if (key == "CPU") {
            const double v = detail::parse_number(key, val);
            require(v >= 1 && v == static_cast<int>(v), "policy: CPU must be a count >= 1");
            cfg.cpu = static_cast<int>(v);
        } else if (key == "RESIDUAL") {
            const double v = detail::parse_number(key, val);
            require(v > 0.0, "policy: RESIDUAL must be positive");
            cfg.residual = v;
        } else if (key == "MAXMEMORY") {
            const double v = detail::parse_number(key, val);
            require(v > 0.0, "policy: MAXMEMORY must be positive bytes");
            cfg.maxmemory = static_cast<std::size_t>(v);
        } else if (key == "MAXTIME") {
            const double v = detail::parse_number(key, val);
            require(v > 0.0, "policy: MAXTIME must be positive seconds");
            cfg.maxtime = v;
        } else if (key == "PRECONDITIONER") {
            if (val == "NONE")
                cfg.preconditioner = PrecondKind::none;
            else if (val == "ILU0")
                cfg.preconditioner = PrecondKind::ilu0;
            else
                throw Error("policy: PRECONDITIONER must be NONE / ILU0, got " + val);
        } else if (key == "SOLVER") {
            if (val == "GMRES")
                cfg.solver = SolverKind::gmres;
            else if (val == "BICGSTAB")
                cfg.solver = SolverKind::bicgstab;
            else if (val == "LANCZOS")
                cfg.solver = SolverKind::lanczos;
            else if (val == "ARNOLDI")
                cfg.solver = SolverKind::arnoldi;
            else
                throw Error("policy: unknown SOLVER " + val);
        } else {
            cfg.warnings.push_back("policy: ignoring unknown keyword " + key);
        }
    }
    return cfg;
}

/// Reads a policy file; an absent path yields all defaults.
inline PolicyConfig parse_policy_file(const std::filesystem::path& path) {
    if (path.empty() || !std::filesystem::exists(path)) return {};
    std::ifstream in(path);
    require(static_cast<bool>(in), "policy: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_policy_text(buf.str());
}

/// The thread-id-suffixed lookup convention: `<stem>.<id>` in `dir`.
inline PolicyConfig parse_policy_file_for_group(const std::filesystem::path& dir, int group_id,
                                                const std::string& stem = "POLICY_INPUT") {
    return parse_policy_file(dir / (stem + "." + std::to_string(group_id)));
}

inline std::string to_policy_text(const PolicyConfig& cfg) {
    std::ostringstream out;
    out << "POLICY = " << policy_name(cfg.policy) << '\n';
    if (cfg.cpu > 0) out << "CPU = " << cfg.cpu << '\n';
    out << "RESIDUAL = " << cfg.residual << '\n';
    if (cfg.maxmemory > 0) out << "MAXMEMORY = " << cfg.maxmemory << '\n';
    out << "MAXTIME = " << cfg.maxtime << '\n';
    out << "PRECONDITIONER = "
        << (cfg.preconditioner == PrecondKind::ilu0 ? "ILU0" : "NONE") << '\n';
    if (cfg.solver != SolverKind::auto_default) out << "SOLVER = " << solver_name(cfg.solver) << '\n';
    return out.str();
}

/// Accuracy-policy trade-off for the re-orthogonalizer: a tight
/// requirement favors the sequential (accurate) variant, a loose one the
/// blocked (fast) variant, and an observed fault convergence forces the
/// doubled classical pass.
inline OrthoVariant select_reorthogonalizer(double residual_requirement, bool fault_seen) {
    require(residual_requirement > 0.0, "reorthogonalizer: requirement must be positive");
    if (fault_seen) return {OrthoKind::dgks};
    if (residual_requirement <= 1e-10) return {OrthoKind::mgs};
    return {OrthoKind::bcgs, 4};
}

struct WorkspacePlan {
    index_t restart_m_initial = 0;
    index_t m_max = 0;
    std::size_t workspace_bytes_cap = 0;
};

namespace detail {

constexpr std::size_t default_memory_budget = std::size_t{1} << 30;  // 1 GiB
constexpr std::size_t fixed_overhead_bytes = 1 << 20;
constexpr index_t stable_restart_m = 30;

}  // namespace detail

/// Sizes the Krylov workspace for a policy: m_max is the largest restart
/// frequency whose basis fits in maxmemory minus the matrix (never more
/// than n, larger subspaces being useless), and the initial frequency is
/// the policy's choice between consuming that space up front (TIME /
/// ACCURACY), starting from the solver floor and letting the restart
/// adaptation grow it (MEMORY), or a fixed default (STABLE).
inline WorkspacePlan plan_workspace(const PolicyConfig& policy, index_t n,
                                    std::size_t matrix_bytes, SolverKind solver, index_t k = 0) {
    const std::size_t budget_total =
        policy.maxmemory > 0 ? policy.maxmemory : detail::default_memory_budget;
    require(budget_total > matrix_bytes + detail::fixed_overhead_bytes,
            "workspace: memory budget does not cover the matrix");
    const std::size_t budget = budget_total - matrix_bytes - detail::fixed_overhead_bytes;

    const bool eigen = solver == SolverKind::lanczos || solver == SolverKind::arnoldi;
    const index_t floor_m = eigen ? k + 2 : 2;

    const auto fits = [&](index_t m) { return detail::krylov_workspace_bytes(n, m) <= budget; };
    require(fits(floor_m), "workspace: memory budget below the solver floor");

    index_t lo = floor_m, hi = std::max(floor_m, n);
    if (fits(hi)) {
        lo = hi;
    } else {
        while (hi - lo > 1) {  // largest m with fits(m); fits(lo), !fits(hi)
            const index_t mid = lo + (hi - lo) / 2;
            (fits(mid) ? lo : hi) = mid;
        }
    }

    WorkspacePlan plan;
    plan.m_max = lo;
    switch (policy.policy) {
        case PolicyKind::time:
        case PolicyKind::accuracy:
            plan.restart_m_initial = plan.m_max;
            break;
        case PolicyKind::memory:
            plan.restart_m_initial = floor_m;
            break;
        case PolicyKind::stable:
            plan.restart_m_initial =
                std::clamp(detail::stable_restart_m, floor_m, plan.m_max);
            break;
    }
    plan.workspace_bytes_cap = detail::krylov_workspace_bytes(n, plan.m_max);
    return plan;
}

}  // namespace ktune
