#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "fsbc/dynamics.hpp"
#include "fsbc/elliptic.hpp"
#include "fsbc/operators.hpp"

namespace fsbc {

/// omega^phi = curl_phi v.
VectorField vorticity(const Grid& g, const VectorField& v, const GeometrySnapshot& geo);

/// One row of the monitored quantities.  Surface norms are taken on Gamma_top;
/// vbar = (v1, v2) there.  The last three members are bookkeeping for the
/// accumulators and the energy identity and are not part of the time series.
struct DiagnosticsRecord {
  double t = 0.0;
  double E = 0.0;                    ///< ||v||_3^2 + sigma |psi|_4^2
  double psi_c3 = 0.0;
  double psi_t_c3 = 0.0;
  double psi_tt_h15 = 0.0;           ///< |psi_tt|_{1.5}
  double vbar_sup = 0.0;
  double vbar_w1inf_integral = 0.0;  ///< trapezoid of |vbar|_{W^{1,inf} seminorm}; 0 when disabled
  double psi_t_c2 = 0.0;
  double psi_t_h3 = 0.0;
  double vort_sup = 0.0;
  double bkm_integral = 0.0;
  double min_d3phi = 0.0;
  double depth_margin = 0.0;
  double grad_psi_sup = 0.0;
  double div_norm = 0.0;
  double energy_identity_residual = 0.0;  ///< NaN until five records exist

  double energy_bracket = 0.0;   ///< int |v|^2 d3phi + sigma int |dbar psi|^2 / |N|
  double energy_exchange = 0.0;  ///< sigma int dt(|N|^-1) |dbar psi|^2
  double vbar_w1inf = 0.0;       ///< instantaneous tangential Lipschitz seminorm of vbar

  double K1() const { return psi_c3 + psi_t_c3 + psi_tt_h15; }
  double K2() const { return vbar_w1inf_integral + vbar_sup; }
  double K1_tilde() const { return psi_c3 + psi_t_c2 + psi_t_h3 + psi_tt_h15; }
};

inline constexpr int kTimeseriesColumns = 16;
/// Column names of the time series, in row order.
const std::array<std::string, kTimeseriesColumns>& timeseries_header();
std::array<double, kTimeseriesColumns> timeseries_row(const DiagnosticsRecord& r);

struct RecordOptions {
  double sigma = 1.0;
  bool k2_accumulator = true;
};

/// Builds the record for `s`, whose right-hand side is `k`, continuing the
/// accumulators of `history` (which holds earlier records, oldest first).
DiagnosticsRecord make_record(const Grid& g, const State& s, const Tendencies& k,
                              std::span<const DiagnosticsRecord> history, const RecordOptions& opt);

/// Relative residual of d/dt bracket = exchange at the last record, using a
/// fourth-order one-sided difference over the last five records.
double energy_identity_residual(std::span<const DiagnosticsRecord> records);

struct BreakdownThresholds {
  double eps_geo = 1e-3;
  double turning_threshold = 10.0;  ///< |dbar psi|_inf proxy for turning
  double k1_max = 1e6;
  double k1_slope = 0.5;   ///< d log K1 / d int K1 dt
  double bkm_max = 1e3;
  double bkm_slope = 0.5;  ///< d log |omega|_inf / d int |omega|_inf dt
  /// A slope only counts as a trend when the quantity rose monotonically by
  /// at least this factor across the window; oscillations are ignored.
  double min_growth = 2.0;
  /// Trends are ignored while the latest value is below this level, so that
  /// round-off growing from 1e-12 is not mistaken for blow-up.
  double trend_floor = 1e-6;
  int window = 10;
};

struct ConditionFlag {
  bool triggered = false;
  double trend_slope = 0.0;
  std::string quantity;
};

struct BreakdownReport {
  ConditionFlag cond_a;        ///< K1 unbounded
  ConditionFlag cond_b_prime;  ///< time integral of |omega|_inf unbounded
  ConditionFlag cond_c;        ///< geometry degenerates
  BreakdownThresholds thresholds;
  bool any() const { return cond_a.triggered || cond_b_prime.triggered || cond_c.triggered; }
};

/// Needs at least three records.
BreakdownReport classify_breakdown(std::span<const DiagnosticsRecord> history, const BreakdownThresholds& th);

struct FerrariRecord {
  double lhs = 0.0;    ///< sup|V| + sup|d^phi V|
  double rhs = 0.0;    ///< (1 + log+ ||omega||_2) |omega|_inf + 1
  double ratio = 0.0;
  double VN_sup = 0.0; ///< sup |V . N| on Gamma_top
};

/// V = v - grad_phi xi, xi the harmonic extension of v.N minus its mean.
FerrariRecord ferrari_check(const EllipticSolver& s, const VectorField& v, const GeometrySnapshot& geo);

enum class HodgeVariant { interior, boundary };

struct HodgeRecord {
  double lhs = 0.0;  ///< ||X||_s^2
  double rhs = 0.0;  ///< the bracket of the estimate
  double ratio = 0.0;
};

/// s = 3 for the interior variant (with the sum of dbar^alpha X, |alpha| = 3)
/// and s = 2 for the boundary variant (with |X.N|_{1.5}).  The boundary
/// variant rejects fields with bottom flux.
HodgeRecord hodge_check(const Grid& g, const VectorField& X, const GeometrySnapshot& geo, HodgeVariant variant);

/// Transport and integration-by-parts identities on the flattened slab.  Each
/// returns |lhs - rhs|; time derivatives of f, h and psi are supplied by the
/// caller (psi_t and dt_phi through geo).
double transport_a1(const Grid& g, const VolumeField& f, const VolumeField& h, const VolumeField& dt_f,
                    const VolumeField& dt_h, const GeometrySnapshot& geo);
/// i in {1, 2}.
double transport_a2(const Grid& g, const VolumeField& f, const VolumeField& h, const GeometrySnapshot& geo, int i);
/// The i = 3 case; h must vanish on Gamma_btm.
double transport_a2_1(const Grid& g, const VolumeField& f, const VolumeField& h, const GeometrySnapshot& geo);
/// v must be solenoidal, satisfy psi_t = v.N on top and have no bottom flux,
/// each to within `tol`.
double transport_a3(const Grid& g, const VolumeField& f, const VolumeField& dt_f, const VectorField& v,
                    const GeometrySnapshot& geo, double tol = 1e-6);
double transport_a4(const Grid& g, const VolumeField& f, const VolumeField& h, const VolumeField& dt_f,
                    const VolumeField& dt_h, const VectorField& v, const GeometrySnapshot& geo, double tol = 1e-6);

struct TransportResiduals {
  double a1 = 0.0;
  double a2_1 = 0.0;  ///< i = 1
  double a2_2 = 0.0;  ///< i = 2
  double a2_3 = 0.0;  ///< i = 3 (h vanishing on the bottom)
  double a3 = 0.0;
  double a4 = 0.0;
  double max() const;
};

struct TransportData {
  VolumeField f, h, dt_f, dt_h;
  VectorField v;
};

TransportResiduals transport_identity_suite(const Grid& g, const TransportData& d, const GeometrySnapshot& geo,
                                            double tol = 1e-6);

/// Surface L2 of d3 v . N + dbar . vbar on Gamma_top.
double trace_identity_residual(const Grid& g, const VectorField& v, const GeometrySnapshot& geo);

/// R^3(f) with D_t^phi d3^phi f supplied by the caller.
VolumeField transport_remainder(const Grid& g, const VolumeField& f, const VectorField& v,
                                const GeometrySnapshot& geo, MultiIndex alpha, const VolumeField& dt_d3phi_f);

/// L2 norm of D_t V + grad_phi Q + R^3(v) + R^2(q) at the middle of three
/// consecutive states, time derivatives by centred differences.
double good_unknown_evolution_residual(const Grid& g, std::span<const State> states,
                                       std::span<const Tendencies> rhs, MultiIndex alpha);

/// L2 norm of D_t omega - omega . grad_phi v at the middle of three states.
double vorticity_transport_residual(const Grid& g, std::span<const State> states, std::span<const Tendencies> rhs);

}  // namespace fsbc
