#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mflab/errors.hpp"
#include "mflab/mass_algebra.hpp"

namespace mflab {

/// Shooting data for v'' + v'/r + rho1 e^v + rho2 a e^{c0} e^{a v} = 0,
/// v(0) = v0, v'(0) = 0.
struct ShootParams {
    double rho1 = 0.0;
    double rho2 = 0.0;
    double a = 0.5;
    double c0 = 0.0;
    double v0 = 0.0;
    double r_max = 1e4;
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_log_step = 0.05;  // largest step in log r

    void validate() const;
};

/// Trace of a radial solution at the integrator's accepted steps. Masses are
/// in units of 2*pi; eta(r) = -r v'(r) is integrated as its own state so
/// eta = sigma1 + a sigma2 is a genuine consistency check.
struct RadialProfile {
    ShootParams params;
    std::vector<double> r;
    std::vector<double> v;
    std::vector<double> eta;
    std::vector<double> sigma1;
    std::vector<double> sigma2;

    std::size_t size() const noexcept { return r.size(); }
    double final_eta() const { return eta.back(); }
};

class ShootError : public NumericalError {
public:
    enum class Kind { StepFailure, Overflow };
    ShootError(Kind kind, double last_radius, const std::string& what)
        : NumericalError(what), kind_(kind), last_radius_(last_radius) {}
    Kind kind() const noexcept { return kind_; }
    double last_radius() const noexcept { return last_radius_; }

private:
    Kind kind_;
    double last_radius_;
};

/// Adaptive Dormand-Prince 5(4) integration in t = log r from a series start.
RadialProfile shoot(const ShootParams& p);

/// Extrapolated total mass from a fit v ~ -eta log r + c over `window`.
/// Throws NonConvergedError when eta still drifts by >= 1% across the
/// window or the fitted slope disagrees with eta(r_max) by >= 5%.
double limit_mass(const RadialProfile& profile, std::pair<double, double> window = {1e3, 1e4});

/// |eta^2 - 4 (sigma1 + sigma2)| at r_max.
double verify_pohozaev(const RadialProfile& profile);

enum class SweepStatus { Converged, NonConverged, OutsideInterval, StepFailure, Overflow };
std::string to_string(SweepStatus s);

struct SweepRow {
    double a = 0.0;
    double c0 = 0.0;
    double ratio = 0.0;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double eta = 0.0;
    double pohozaev_residual = 0.0;
    SweepStatus status = SweepStatus::Converged;
};

/// Shoots every (c0, ratio) cell with rho1 = base.rho1 and rho2 = ratio * rho1.
/// Converged cells whose eta leaves the admissible interval are flagged
/// OutsideInterval. Cells run in parallel; rows keep grid order.
std::vector<SweepRow> sweep_eta(double a, const std::vector<double>& c0_grid,
                                const std::vector<double>& ratio_grid, ShootParams base = {},
                                std::pair<double, double> window = {1e3, 1e4});

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
void write_profile_csv(const std::filesystem::path& path, const RadialProfile& profile);

}  // namespace mflab
