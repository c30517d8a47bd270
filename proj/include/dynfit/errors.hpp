#pragma once

#include <stdexcept>
#include <string>

namespace dynfit {

struct IntegrationDiverged : std::runtime_error {
    double last_valid_time;
    explicit IntegrationDiverged(double t)
        : std::runtime_error("integration diverged at t=" + std::to_string(t)),
          last_valid_time(t) {}
};

struct DegenerateReference : std::runtime_error {
    explicit DegenerateReference(const std::string& what)
        : std::runtime_error(what) {}
};

struct WindowTooLong : std::runtime_error {
    explicit WindowTooLong(const std::string& what) : std::runtime_error(what) {}
};

struct SubsetTooSmall : std::runtime_error {
    explicit SubsetTooSmall(const std::string& what) : std::runtime_error(what) {}
};

struct RankDeficient : std::runtime_error {
    long effective_rank;
    long n_active;
    RankDeficient(long rank, long active)
        : std::runtime_error("rank-deficient fit: rank " + std::to_string(rank) +
                             " < " + std::to_string(active) + " active terms"),
          effective_rank(rank), n_active(active) {}
};

struct DegeneratePercentile : std::runtime_error {
    explicit DegeneratePercentile(const std::string& what) : std::runtime_error(what) {}
};

struct NoCandidates : std::runtime_error {
    explicit NoCandidates(const std::string& what) : std::runtime_error(what) {}
};

struct NoViableModel : std::runtime_error {
    explicit NoViableModel(const std::string& what) : std::runtime_error(what) {}
};

struct NoTrueOverlap : std::runtime_error {
    int variable;
    explicit NoTrueOverlap(int var)
        : std::runtime_error("no shared terms with the reference model for variable " +
                             std::to_string(var)),
          variable(var) {}
};

struct MismatchedLibrary : std::runtime_error {
    explicit MismatchedLibrary(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dynfit
