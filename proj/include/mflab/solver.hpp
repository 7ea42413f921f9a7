#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "mflab/errors.hpp"
#include "mflab/functional.hpp"
#include "mflab/mass_algebra.hpp"
#include "mflab/torus_field.hpp"

namespace mflab {

struct NewtonOptions {
    int max_iter = 50;
    double residual_tol = 1e-10;  // on the sup norm of el_residual
    double damping_factor = 0.5;
    double damping_floor = 1e-4;
    int cg_max_iter = 400;
    double cg_rtol = 1e-11;
};

struct ContinuationOptions {
    std::vector<RhoPair> path;  // waypoints, absolute units
    double step = 0.5;          // largest move in (rho1, rho2) per solve
    int max_backtracks = 6;
    bool allow_blowup_study = false;  // skip the waypoint region check
};

struct SolveConfig {
    RhoPair rho;
    Intensity a;
    Weights h;
    NewtonOptions newton;
    ContinuationOptions continuation;

    TorusGrid grid() const { return h.h1().grid(); }
    void validate() const;
};

enum class SolveStatus { Converged, Diverged, SingularJacobian };
std::string to_string(SolveStatus s);

struct SolutionRecord {
    TorusField u;
    double residual_norm = 0.0;
    RhoPair rho;
    int iterations = 0;
    FunctionalValue J_value;
    SolveStatus status = SolveStatus::Converged;
    Intensity a{0.5};
    Weights h;
};

/// Diverged or SingularJacobian; carries the last iterate.
class SolveError : public NumericalError {
public:
    SolveError(const std::string& what, SolutionRecord last)
        : NumericalError(what), last_(std::move(last)) {}
    const SolutionRecord& last() const noexcept { return last_; }
    SolveStatus status() const noexcept { return last_.status; }

private:
    SolutionRecord last_;
};

class PathStuckError : public NumericalError {
public:
    PathStuckError(const std::string& what, std::vector<SolutionRecord> done, RhoPair failed_at,
                   double last_sup_norm)
        : NumericalError(what), done_(std::move(done)), failed_at_(failed_at), last_sup_(last_sup_norm) {}
    const std::vector<SolutionRecord>& records() const noexcept { return done_; }
    RhoPair failed_at() const noexcept { return failed_at_; }
    double last_sup_norm() const noexcept { return last_sup_; }

private:
    std::vector<SolutionRecord> done_;
    RhoPair failed_at_;
    double last_sup_;
};

/// Damped Newton on the mean-zero subspace, solving at cfg.rho.
SolutionRecord newton_solve(const SolveConfig& cfg, const TorusField& u0);

/// Walks cfg.continuation.path from a zero start, warm-starting each solve
/// from the previous one. Throws PathStuckError once a step has been halved
/// max_backtracks times without a converged solve.
std::vector<SolutionRecord> continuation_run(const SolveConfig& cfg);

struct BlowupReport {
    std::vector<TorusPoint> peak_set;
    std::vector<MassPair> local_masses;  // absolute units, radius ball_radius
    std::vector<std::array<MassPair, 3>> mass_ladder;  // radii R, R/2, R/4
    std::vector<MassPair> richardson;
    MassPair residual_masses;
    RhoPair rho;
    double ball_radius = 0.0;
    double sup_norm = 0.0;  // of u
    double sup_M = 0.0;     // of max(u1, u2)
    double selection_bound = 0.0;
};

struct DiagnosticsOptions {
    double peak_drop = 2.0;    // candidates sit within this of sup M
    double merge_cells = 4.0;  // peaks closer than this many cells merge
    double concentration_margin = 1.0;  // need M(p) + 2 log R above this
};

BlowupReport blowup_diagnostics(const SolutionRecord& rec, double ball_radius, DiagnosticsOptions opts = {});

struct BlowupClassification {
    std::vector<BlowupType> types;
    bool r1_check_applies = false;  // some peak carries m1 > 0
    double r1_residual_sigma = 0.0;
    bool r1_small = true;
};

BlowupClassification classify_blowup(const BlowupReport& report, Intensity a, double tol);

void write_config_snapshot(const std::filesystem::path& path, const SolveConfig& cfg);
void write_diagnostics_csv(const std::filesystem::path& path, const BlowupReport& report);
void write_records_csv(const std::filesystem::path& path, const std::vector<SolutionRecord>& records);

/// config.txt, h1.bin, h2.bin, u.bin and diagnostics.csv under `dir`.
void persist_run(const std::filesystem::path& dir, const SolveConfig& cfg, const SolutionRecord& rec,
                 const BlowupReport& report);

}  // namespace mflab
