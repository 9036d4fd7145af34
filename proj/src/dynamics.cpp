#include "fermisea/dynamics.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <utility>

#include "fermisea/quadrature.hpp"

namespace fermisea {

namespace {
constexpr int kMaxSeriesOrder = 8;
const cplx kI(0.0, 1.0);
}  // namespace

PotentialTrajectory PotentialTrajectory::from_field(const SpaceTimeField& f) {
  double scale = std::max(1.0, f.v.real().cwiseAbs().maxCoeff());
  double im = f.v.imag().cwiseAbs().maxCoeff();
  if (im > 1e-12 * scale) throw ParameterError("PotentialTrajectory: field has an imaginary part");
  PotentialTrajectory out(f.grid);
  out.values = f.v.real();
  return out;
}

Field PotentialTrajectory::slice(int j) const {
  Field f(grid.space);
  f.v = values.row(j).transpose().cast<cplx>();
  return f;
}

double PotentialTrajectory::mixed_norm() const {
  std::vector<double> wt = trapezoid_weights(grid.nt, grid.dt());
  double acc = 0.0;
  for (int j = 0; j < grid.nodes(); ++j) {
    double lx = lp_norm(slice(j), static_cast<double>(grid.space.d()));
    acc += wt[j] * lx * lx;
  }
  return std::sqrt(acc);
}

PotentialTrajectory convolved_potential(const SpaceTimeField& phi, const RadialSymbol& w1) {
  PotentialTrajectory out(phi.grid);
  const SpatialGrid& g = phi.grid.space;
  for (int j = 0; j < phi.grid.nodes(); ++j) {
    Field hat = transform(phi.slice(j));
    for (int i = 0; i < g.size(); ++i) hat.v[i] *= w1(std::sqrt(g.ksq(i)));
    out.values.row(j) = inverse_transform(hat).v.real().transpose();
  }
  return out;
}

PotentialTrajectory random_potential(const SpaceTimeGrid& g, RngStream& rng, int modes, double target_norm) {
  if (modes < 1) throw ParameterError("random_potential: need at least one mode");
  const SpatialGrid& gs = g.space;
  PotentialTrajectory out(g);
  for (int b = 0; b < modes; ++b) {
    std::array<double, 3> x0{}, k0{};
    for (int ax = 0; ax < gs.d(); ++ax) {
      x0[ax] = rng.uniform(0.0, gs.box());
      k0[ax] = gs.dk() * double(int(rng.uniform(0.0, 3.0)));
    }
    double width = gs.box() / 8.0 * rng.uniform(0.8, 1.2);
    double om = rng.uniform(0.5, 2.5);
    double th = rng.uniform(0.0, kTwoPi);
    double c = rng.uniform(0.5, 1.0);
    Eigen::VectorXd bump(gs.size());
    for (int i = 0; i < gs.size(); ++i) {
      double dist2 = 0.0, carrier = 0.0;
      for (int ax = 0; ax < gs.d(); ++ax) {
        double x = gs.dx() * gs.axis_bin(i, ax);
        double dxp = std::remainder(x - x0[ax], gs.box());
        dist2 += dxp * dxp;
        carrier += k0[ax] * x;
      }
      bump[i] = std::exp(-0.5 * dist2 / (width * width)) * std::cos(carrier);
    }
    for (int j = 1; j < g.nt; ++j) {  // endpoints stay exactly zero
      double t = g.t(j);
      double env = std::sin(kPi * t / g.horizon) * std::cos(om * t + th);
      out.values.row(j) += (c * env) * bump.transpose();
    }
  }
  double norm = out.mixed_norm();
  if (norm == 0.0) throw ParameterError("random_potential: degenerate draw");
  out.values *= target_norm / norm;
  return out;
}

DensityMatrix conjugated_potential(const Field& v_slice, double t) {
  return free_conjugate(multiplication_operator(v_slice), -t);
}

namespace leftspec {

Eigen::MatrixXcd from_op(Eigen::MatrixXcd m, const SpatialGrid& g) {
  kernelfft::left_fft(m, g, -1);
  return m;
}

Eigen::MatrixXcd to_op(Eigen::MatrixXcd m, const SpatialGrid& g) {
  kernelfft::left_fft(m, g, +1);
  m *= 1.0 / g.size();
  return m;
}

}  // namespace leftspec

namespace {

// C(t_j) X on left-spectral data: undo the left phases, multiply by V(t_j, x)
// in position, redo the phases with the opposite sign.
void apply_conjugated_mult(Eigen::MatrixXcd& y, const SpatialGrid& g, const Eigen::VectorXcd& phase_minus,
                           const Eigen::VectorXd& v_row) {
  y.array().colwise() *= phase_minus.array();
  kernelfft::left_fft(y, g, +1);
  y *= 1.0 / g.size();
  y.array().colwise() *= v_row.cast<cplx>().array();
  kernelfft::left_fft(y, g, -1);
  y.array().colwise() *= phase_minus.conjugate().array();
}

void sweep_impl(const PotentialTrajectory& V, int n_max, int j_stop, const SweepVisitor& visit) {
  if (n_max < 0 || n_max > kMaxSeriesOrder) throw ParameterError("wave_series_sweep: order out of range");
  const SpatialGrid& g = V.grid.space;
  const int sz = g.size();
  const double dt = V.grid.dt();

  std::vector<Eigen::MatrixXcd> w(n_max + 1), acc(n_max), gprev(n_max);
  w[0] = leftspec::from_op(Eigen::MatrixXcd::Identity(sz, sz), g);
  for (int n = 1; n <= n_max; ++n) w[n] = Eigen::MatrixXcd::Zero(sz, sz);
  for (int n = 0; n < n_max; ++n) acc[n] = Eigen::MatrixXcd::Zero(sz, sz);

  Eigen::VectorXcd phase_minus(sz);
  for (int j = 0; j <= j_stop; ++j) {
    double t = V.grid.t(j);
    for (int i = 0; i < sz; ++i) phase_minus[i] = std::exp(cplx(0.0, -t * g.ksq(i)));
    Eigen::VectorXd vrow = V.values.row(j).transpose();
    // ascending orders: W^{(n+1)} at this node only needs W^{(n)} at this node
    for (int n = 0; n < n_max; ++n) {
      Eigen::MatrixXcd gcur = w[n];
      apply_conjugated_mult(gcur, g, phase_minus, vrow);
      if (j > 0) {
        acc[n] += (0.5 * dt) * (gprev[n] + gcur);
        w[n + 1] = -kI * acc[n];
      }
      gprev[n] = std::move(gcur);
    }
    visit(j, w);
  }
}

int node_of(const SpaceTimeGrid& g, double t) {
  int j = static_cast<int>(std::lround(t / g.dt()));
  if (j < 0 || j >= g.nodes() || std::abs(t - g.t(j)) > 1e-9 * std::max(1.0, g.horizon))
    throw ParameterError("wave series: time is not a grid node");
  return j;
}

}  // namespace

void wave_series_sweep(const PotentialTrajectory& V, int n_max, const SweepVisitor& visit) {
  sweep_impl(V, n_max, V.grid.nodes() - 1, visit);
}

DensityMatrix wave_series_term(const PotentialTrajectory& V, int n, double t) {
  int j = node_of(V.grid, t);
  DensityMatrix out(V.grid.space);
  sweep_impl(V, n, j, [&](int node, const std::vector<Eigen::MatrixXcd>& orders) {
    if (node == j) out.op = leftspec::to_op(orders[n], V.grid.space);
  });
  return out;
}

WaveOperatorResult wave_operator(const PotentialTrajectory& V, double t, int n_max) {
  int j = node_of(V.grid, t);
  const SpatialGrid& g = V.grid.space;
  WaveOperatorResult res;
  res.w = DensityMatrix(g);
  double s1 = 0.0;
  sweep_impl(V, n_max, j, [&](int node, const std::vector<Eigen::MatrixXcd>& orders) {
    if (node != j) return;
    Eigen::MatrixXcd sum = orders[0];
    for (int n = 1; n <= n_max; ++n) sum += orders[n];
    res.w.op = leftspec::to_op(std::move(sum), g);
    if (n_max >= 1) {
      DensityMatrix w1(g);
      w1.op = leftspec::to_op(orders[1], g);
      s1 = schatten_norm(w1, 2.0 * g.d());
    }
  });
  double vnorm = V.mixed_norm();
  res.c_fit = vnorm > 0.0 ? s1 / vnorm : 0.0;
  res.tail_estimate = vnorm > 0.0 ? std::pow(s1, n_max + 1) / std::pow(std::tgamma(n_max + 2.0), 0.4) : 0.0;
  res.truncation_warning = res.tail_estimate > 1e-3 * schatten_norm(res.w, 2.0);
  return res;
}

WaveSeriesReport factorial_decay_report(const PotentialTrajectory& V, int n_max, double eps) {
  if (n_max < 3 || n_max > kMaxSeriesOrder) throw ParameterError("factorial_decay_report: n_max out of range");
  if (!(eps > 0.0 && eps < 0.5)) throw ParameterError("factorial_decay_report: eps must lie in (0, 1/2)");
  const SpatialGrid& g = V.grid.space;
  const int last = V.grid.nodes() - 1;
  WaveSeriesReport rep;
  rep.eps = eps;
  rep.v_norm = V.mixed_norm();
  wave_series_sweep(V, n_max, [&](int node, const std::vector<Eigen::MatrixXcd>& orders) {
    if (node != last) return;
    for (int n = 1; n <= n_max; ++n) {
      DensityMatrix dm(g);
      dm.op = leftspec::to_op(orders[n], g);
      rep.n.push_back(n);
      rep.norms.push_back(schatten_norm(dm, 2.0 * g.d()));
    }
  });
  rep.c_fit = rep.v_norm > 0.0 ? rep.norms[0] / rep.v_norm : 0.0;
  rep.pass = true;
  for (size_t i = 0; i < rep.n.size(); ++i) {
    int n = rep.n[i];
    double bound = std::pow(rep.norms[0], n) / std::pow(std::tgamma(n + 1.0), 0.5 - eps);
    double ratio = bound > 0.0 ? rep.norms[i] / bound
                               : (rep.norms[i] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    rep.bounds.push_back(bound);
    rep.ratios.push_back(ratio);
    if (!(ratio <= 1.5)) rep.pass = false;
  }
  return rep;
}

namespace {

void free_conjugate_ip(Eigen::MatrixXcd& m, const SpatialGrid& g, const Eigen::VectorXcd& phase) {
  // phase[i] = e^{-i t |k_i|^2}: spectral entry (k,k') picks up phase_k conj(phase_k')
  kernelfft::to_spectral(m, g);
  m.array().colwise() *= phase.array();
  m.array().rowwise() *= phase.conjugate().transpose().array();
  kernelfft::from_spectral(m, g);
}

}  // namespace

void evolve_Q_stream(const PotentialTrajectory& V, const DensityMatrix& Q0,
                     const std::function<void(int, const Eigen::MatrixXcd&)>& visit) {
  const SpatialGrid& g = V.grid.space;
  const int sz = g.size();
  const double dt = V.grid.dt();
  Eigen::VectorXcd half_phase(sz);
  for (int i = 0; i < sz; ++i) half_phase[i] = std::exp(cplx(0.0, -0.5 * dt * g.ksq(i)));
  Eigen::MatrixXcd m = Q0.op;
  visit(0, m);
  Eigen::VectorXcd pot_phase(sz);
  for (int j = 0; j + 1 < V.grid.nodes(); ++j) {
    free_conjugate_ip(m, g, half_phase);
    for (int i = 0; i < sz; ++i)
      pot_phase[i] = std::exp(cplx(0.0, -dt * 0.5 * (V.values(j, i) + V.values(j + 1, i))));
    m.array().colwise() *= pot_phase.array();
    m.array().rowwise() *= pot_phase.conjugate().transpose().array();
    free_conjugate_ip(m, g, half_phase);
    visit(j + 1, m);
  }
}

OperatorTrajectory evolve_Q(const PotentialTrajectory& V, const DensityMatrix& Q0) {
  OperatorTrajectory traj(V.grid);
  traj.slices.resize(V.grid.nodes());
  evolve_Q_stream(V, Q0, [&](int j, const Eigen::MatrixXcd& m) { traj.slices[j] = m; });
  return traj;
}

OperatorTrajectory evolve_Q(const SpaceTimeField& phi, const DensityMatrix& Q0, const RadialSymbol& w1) {
  return evolve_Q(convolved_potential(phi, w1), Q0);
}

OperatorTrajectory reconstruct_Q(const SpaceTimeField& phi, const DensityMatrix& Q0,
                                 const DensityMatrix& gamma_f, const RadialSymbol& w1,
                                 int n_max, bool* truncation_warning) {
  PotentialTrajectory V = convolved_potential(phi, w1);
  const SpatialGrid& g = V.grid.space;
  const int sz = g.size();
  OperatorTrajectory traj(V.grid);
  traj.slices.resize(V.grid.nodes());
  Eigen::MatrixXcd base = gamma_f.op + Q0.op;
  double s1_last = 0.0, sum_last = 0.0;
  const int last = V.grid.nodes() - 1;
  Eigen::VectorXcd phase(sz);
  wave_series_sweep(V, n_max, [&](int j, const std::vector<Eigen::MatrixXcd>& orders) {
    Eigen::MatrixXcd wsum = orders[0];
    for (int n = 1; n <= n_max; ++n) wsum += orders[n];
    Eigen::MatrixXcd wop = leftspec::to_op(std::move(wsum), g);
    Eigen::MatrixXcd q = wop * base * wop.adjoint();
    double t = V.grid.t(j);
    for (int i = 0; i < sz; ++i) phase[i] = std::exp(cplx(0.0, -t * g.ksq(i)));
    kernelfft::to_spectral(q, g);
    q.array().colwise() *= phase.array();
    q.array().rowwise() *= phase.conjugate().transpose().array();
    kernelfft::from_spectral(q, g);
    traj.slices[j] = q - gamma_f.op;
    if (j == last && n_max >= 1) {
      DensityMatrix w1m(g);
      w1m.op = leftspec::to_op(orders[1], g);
      s1_last = schatten_norm(w1m, 2.0 * g.d());
      DensityMatrix ws(g);
      ws.op = wop;
      sum_last = schatten_norm(ws, 2.0);
    }
  });
  if (truncation_warning) {
    double tail = std::pow(s1_last, n_max + 1) / std::pow(std::tgamma(n_max + 2.0), 0.4);
    *truncation_warning = tail > 1e-3 * sum_last;
  }
  return traj;
}

ScatteringTable scattering_diagnostic(const OperatorTrajectory& traj, double p) {
  if (!(p >= 1.0)) throw ParameterError("scattering_diagnostic: p must be >= 1");
  const SpatialGrid& g = traj.grid.space;
  const int sz = g.size();
  ScatteringTable table;
  std::vector<Eigen::MatrixXcd> back;
  std::vector<double> tt;
  for (double frac : {0.125, 0.25, 0.5, 1.0}) {
    int j = static_cast<int>(std::lround(traj.grid.nt * frac));
    double t = traj.grid.t(j);
    Eigen::MatrixXcd m = traj.slices[j];
    Eigen::VectorXcd phase(sz);
    for (int i = 0; i < sz; ++i) phase[i] = std::exp(cplx(0.0, t * g.ksq(i)));
    kernelfft::to_spectral(m, g);
    m.array().colwise() *= phase.array();
    m.array().rowwise() *= phase.conjugate().transpose().array();
    kernelfft::from_spectral(m, g);
    back.push_back(std::move(m));
    tt.push_back(t);
  }
  table.decreasing = true;
  for (int i = 0; i + 1 < static_cast<int>(back.size()); ++i) {
    DensityMatrix diff(g);
    diff.op = back[i + 1] - back[i];
    table.t1.push_back(tt[i]);
    table.t2.push_back(tt[i + 1]);
    table.s.push_back(schatten_norm(diff, p));
    if (i > 0 && !(table.s[i] < table.s[i - 1])) table.decreasing = false;
  }
  return table;
}

}  // namespace fermisea
