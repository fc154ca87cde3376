#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "rflab/error.hpp"
#include "rflab/relenergy.hpp"

using namespace rflab;

namespace {

ModelParams params(double kappa, double alpha = -0.5) {
  ModelParams p;
  p.kappa = kappa;
  p.alpha = alpha;
  p.gamma = 2.0;
  return p;
}

State random_state(const PeriodicGrid& g, oracle::Gen& gen) {
  State s = State::at_rest(g, gen.smooth_positive(g, 1.0, 0.4));
  for (int a = 0; a < g.dim(); ++a) {
    const ScalarField v = gen.rough(g, -0.5, 0.5);
    for (std::size_t i = 0; i < g.size(); ++i) s.mom[a][i] = s.rho[i] * v[i];
  }
  return s;
}

StrongProxy smooth_proxy(const PeriodicGrid& g, oracle::Gen& gen, double time = 0.0) {
  StrongProxy p;
  p.time = time;
  p.rho_bar = gen.smooth_positive(g, 1.2, 0.3);
  p.u_bar = VectorField(g.dim(), g.size());
  for (int a = 0; a < g.dim(); ++a) {
    const ScalarField v = gen.smooth_positive(g, 1.0, 0.8);
    for (std::size_t i = 0; i < g.size(); ++i) p.u_bar[a][i] = v[i] - 1.0;
  }
  return p;
}

State state_of(const StrongProxy& p, const PeriodicGrid& g) {
  State s = State::at_rest(g, p.rho_bar, p.time);
  for (int a = 0; a < g.dim(); ++a) {
    for (std::size_t i = 0; i < g.size(); ++i) s.mom[a][i] = p.rho_bar[i] * p.u_bar[a][i];
  }
  return s;
}

}  // namespace

TEST_CASE("identical states have zero relative energy and zero terms") {
  oracle::Gen gen(61);
  for (int dim : {1, 2}) {
    const PeriodicGrid g(dim, dim == 1 ? 32 : 12, 1.0);
    ModelParams p = params(0.5);
    p.epsilon = 0.1;
    p.nu = 2.0;
    const auto k = KernelTable::build(p, g);
    const StrongProxy proxy = smooth_proxy(g, gen);
    const State s = state_of(proxy, g);
    for (auto mode : {RelativeMode::WeakStrong, RelativeMode::Relaxation}) {
      const auto parts = relative_energy(s, proxy.rho_bar, proxy.u_bar, p, k, mode);
      CHECK(std::abs(parts.kinetic) < 1e-28);
      CHECK(parts.internal == 0.0);
      CHECK(parts.interaction == 0.0);
      const auto r = term_rates(s, proxy, p, k, mode);
      for (double t : r.terms) CHECK(std::abs(t) < 1e-28);
      CHECK(std::abs(r.friction) < 1e-28);
    }
  }
}

TEST_CASE("unit relative velocity on the unit torus") {
  const PeriodicGrid g(2, 8, 1.0);
  const ModelParams p = params(0.3);
  const auto k = KernelTable::build(p, g);
  State s = State::at_rest(g, ScalarField(g.size(), 1.0));
  for (double& m : s.mom[0]) m = 1.0;
  const auto parts = relative_energy(s, ScalarField(g.size(), 1.0), VectorField(2, g.size()), p, k,
                                     RelativeMode::WeakStrong);
  CHECK(parts.kinetic == doctest::Approx(0.5));
  CHECK(parts.internal == 0.0);
  CHECK(parts.interaction == 0.0);
  CHECK(parts.total() == doctest::Approx(0.5));
  ModelParams pe = p;
  pe.epsilon = 0.2;
  CHECK(relative_energy(s, ScalarField(g.size(), 1.0), VectorField(2, g.size()), pe, k, RelativeMode::Relaxation)
            .kinetic == doctest::Approx(0.1));
  CHECK_THROWS_AS(relative_energy(s, ScalarField(g.size(), 0.0), VectorField(2, g.size()), p, k,
                                  RelativeMode::WeakStrong),
                  ParameterError);
  CHECK_THROWS_AS(relative_energy(s, ScalarField(g.size(), 1.0), VectorField(2, g.size()), p, k,
                                  RelativeMode::Relaxation),
                  ParameterError);
}

TEST_CASE("interaction part of a single Fourier mode") {
  const double kappa = 0.8, amp = 0.1;
  for (int dim : {1, 2}) {
    const PeriodicGrid g(dim, dim == 1 ? 64 : 24, 1.5);
    const ModelParams p = params(kappa, dim == 1 ? -0.5 : -1.1);
    const auto k = KernelTable::build(p, g);
    const int kx = 2, ky = dim == 2 ? 1 : 0;
    ScalarField rho(g.size()), rho_bar(g.size(), 1.0);
    for (std::size_t c = 0; c < g.size(); ++c) {
      auto [ix, iy] = g.coords(c);
      const double phase = 2.0 * std::numbers::pi * (kx * g.center(ix) + ky * (dim == 2 ? g.center(iy) : 0.0)) / g.length();
      rho[c] = 1.0 + amp * std::cos(phase);
    }
    const State s = State::at_rest(g, rho);
    const auto parts = relative_energy(s, rho_bar, VectorField(dim, g.size()), p, k, RelativeMode::WeakStrong);
    // cos averages to 1/2 in square.
    const double spectral = 0.5 * kappa * k.symbol_at(kx, ky) * amp * amp * 0.5 * g.measure();
    CHECK(parts.interaction == doctest::Approx(spectral).epsilon(1e-10));
    ScalarField q(g.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = rho[i] - 1.0;
    const ScalarField wq = oracle::convolve(g, p.alpha, p.sign, q);
    long double direct = 0.0L;
    for (std::size_t i = 0; i < q.size(); ++i) direct += static_cast<long double>(q[i]) * wq[i];
    direct *= 0.5L * kappa * g.cell_volume();
    CHECK(parts.interaction == doctest::Approx(static_cast<double>(direct)).epsilon(1e-10));
  }
}

TEST_CASE("asymmetric and antisymmetrised forms of I3 agree") {
  oracle::Gen gen(62);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 1 + trial % 2;
    const int n = dim == 1 ? gen.integer(16, 64) : gen.integer(6, 16);
    const PeriodicGrid g(dim, n, gen.uniform(0.5, 2.0));
    ModelParams p = params(gen.uniform(0.1, 2.0), dim == 1 ? gen.uniform(-0.9, -0.1) : gen.uniform(-1.5, -0.1));
    p.sign = trial % 3 == 0 ? -1 : 1;
    const auto k = KernelTable::build(p, g);
    const StrongProxy proxy = smooth_proxy(g, gen);
    const ScalarField rho = gen.rough(g, 0.2, 2.0);
    ScalarField q(g.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = rho[i] - proxy.rho_bar[i];
    const double asym = interaction_term(rho, proxy.rho_bar, proxy.u_bar, p, k);
    const double sym = oracle::i3_symmetrized(g, p.alpha, p.sign, p.kappa, q, proxy.u_bar);
    CHECK(std::abs(asym - sym) <= 1e-9 * std::abs(sym));
  }
}

TEST_CASE("a resting proxy with constant density makes every term vanish") {
  oracle::Gen gen(63);
  const PeriodicGrid g(2, 12, 1.0);
  ModelParams p = params(0.6);
  p.nu = 1.0;
  const auto k = KernelTable::build(p, g);
  StrongProxy proxy;
  proxy.rho_bar = ScalarField(g.size(), 1.1);
  proxy.u_bar = VectorField(2, g.size());
  const auto r = term_rates(random_state(g, gen), proxy, p, k, RelativeMode::WeakStrong);
  CHECK(r.terms[0] == 0.0);
  CHECK(r.terms[1] == 0.0);
  CHECK(r.terms[2] == 0.0);
  CHECK(r.friction > 0.0);
}

TEST_CASE("kinetic part is symmetric in the velocity slots") {
  oracle::Gen gen(64);
  for (int trial = 0; trial < 20; ++trial) {
    const PeriodicGrid g(2, 8, 1.0);
    const ModelParams p = params(0.2);
    const auto k = KernelTable::build(p, g);
    const State s = random_state(g, gen);
    const StrongProxy proxy = smooth_proxy(g, gen);
    const VectorField u = velocity(s, vacuum_floor(s.rho, g));
    State swapped = State::at_rest(g, s.rho);
    for (int a = 0; a < 2; ++a) {
      for (std::size_t i = 0; i < g.size(); ++i) swapped.mom[a][i] = s.rho[i] * proxy.u_bar[a][i];
    }
    const auto one = relative_energy(s, s.rho, proxy.u_bar, p, k, RelativeMode::WeakStrong);
    const auto two = relative_energy(swapped, s.rho, u, p, k, RelativeMode::WeakStrong);
    CHECK(one.kinetic == doctest::Approx(two.kinetic).epsilon(1e-12));
    CHECK(one.kinetic >= 0.0);
  }
}

TEST_CASE("relative energy of a small perturbation scales quadratically") {
  oracle::Gen gen(65);
  const PeriodicGrid g(2, 16, 1.0);
  const ModelParams p = params(0.3);
  const auto k = KernelTable::build(p, g);
  const StrongProxy proxy = smooth_proxy(g, gen);
  const ScalarField eta = gen.smooth_positive(g, 1.0, 0.9);
  const ScalarField w = gen.smooth_positive(g, 1.0, 0.9);
  double prev = 0.0;
  for (double delta : {0.02, 0.01, 0.005}) {
    State s = State::at_rest(g, proxy.rho_bar);
    for (std::size_t i = 0; i < g.size(); ++i) {
      s.rho[i] = proxy.rho_bar[i] * (1.0 + delta * (eta[i] - 1.0));
      for (int a = 0; a < 2; ++a) s.mom[a][i] = s.rho[i] * (proxy.u_bar[a][i] + delta * (w[i] - 1.0));
    }
    const double psi = relative_energy(s, proxy.rho_bar, proxy.u_bar, p, k, RelativeMode::WeakStrong).total();
    CHECK(psi > 0.0);
    if (prev > 0.0) CHECK(prev / psi == doctest::Approx(4.0).epsilon(0.05));
    prev = psi;
  }
}

TEST_CASE("Gronwall fit examples") {
  std::vector<double> t, up, flat, zero, later;
  for (int i = 0; i <= 20; ++i) {
    t.push_back(0.05 * i);
    up.push_back(1e-3 * std::exp(2.0 * t.back()));
    flat.push_back(0.7);
    zero.push_back(0.0);
    later.push_back(i > 3 ? 1e-10 : 0.0);
  }
  const GronwallFit a = gronwall_fit(t, up);
  CHECK(a.fitted_C == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(a.bound_violated);
  const GronwallFit b = gronwall_fit(t, flat);
  CHECK(b.fitted_C == 0.0);
  CHECK_FALSE(b.bound_violated);
  const GronwallFit c = gronwall_fit(t, zero);
  CHECK(c.fitted_C == 0.0);
  CHECK_FALSE(c.bound_violated);
  const GronwallFit d = gronwall_fit(t, later);
  CHECK(d.bound_violated);
  CHECK(std::isinf(d.fitted_C));
  CHECK(d.note == "bound trivially violated");
  CHECK_THROWS_AS(gronwall_fit(t, std::vector<double>(3, 1.0)), ParameterError);
}

TEST_CASE("the envelope holds by construction on random series") {
  oracle::Gen gen(66);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> t{0.0}, psi{gen.uniform(0.1, 1.0)};
    for (int i = 1; i < 30; ++i) {
      t.push_back(t.back() + gen.uniform(0.01, 0.1));
      psi.push_back(psi.back() * std::exp(gen.uniform(-0.3, 0.3)));
    }
    const GronwallFit f = gronwall_fit(t, psi);
    CHECK_FALSE(f.bound_violated);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(psi[i] <= psi[0] * std::exp(f.fitted_C * t[i]) * (1.0 + 1e-12));
  }
}

TEST_CASE("relaxation fit of an exact eps^2 law") {
  const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> sup, phi0(eps.size(), 0.0);
  for (double e : eps) sup.push_back(3.0 * e * e);
  const RelaxationFit f = relaxation_fit(eps, sup, phi0, 2.0);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.prefactor == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.fitted_C == doctest::Approx(std::log(3.0) / 2.0).epsilon(1e-12));
  CHECK_FALSE(f.bound_violated);
  const auto j = nlohmann::json::parse(f.to_json());
  CHECK(j.at("mode") == "relaxation");
  CHECK(j.at("epsilon_list").size() == 4);
  CHECK(j.contains("sup_phi_list"));
  CHECK(j.contains("bound_violated"));
  CHECK_THROWS_AS(loglog_slope(std::vector<double>{1.0}, std::vector<double>{1.0}), ParameterError);
  CHECK(loglog_slope(std::vector<double>{1.0, 2.0, 4.0}, std::vector<double>{3.0, 3.0 / 8.0, 3.0 / 64.0}) ==
        doctest::Approx(-3.0));
}

TEST_CASE("term decomposition of identical trajectories and time-grid checks") {
  oracle::Gen gen(67);
  const PeriodicGrid g(1, 32, 1.0);
  ModelParams p = params(0.4);
  p.nu = 1.0;
  const auto k = KernelTable::build(p, g);
  std::vector<StrongProxy> strong;
  std::vector<State> weak;
  for (int i = 0; i < 4; ++i) {
    strong.push_back(smooth_proxy(g, gen, 0.1 * i));
    weak.push_back(state_of(strong.back(), g));
    // Recover u_bar = m/rho from the stored state so both sides carry the same bits.
    strong.back() = proxy_from_state(weak.back(), g);
  }
  const RelativeEnergyReport rep = term_decomposition(weak, strong, p, k, RelativeMode::WeakStrong);
  REQUIRE(rep.times.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(rep.psi_or_phi[i]) < 1e-28);
    for (int j = 0; j < 4; ++j) CHECK(std::abs(rep.terms[j][i]) < 1e-28);
  }
  CHECK(rep.fitted_C == 0.0);
  CHECK_FALSE(rep.bound_violated);

  std::vector<State> shifted = weak;
  shifted[2].time += 1e-3;
  CHECK_THROWS_AS(term_decomposition(shifted, strong, p, k, RelativeMode::WeakStrong), GridMismatch);
  shifted.pop_back();
  CHECK_THROWS_AS(term_decomposition(shifted, strong, p, k, RelativeMode::WeakStrong), GridMismatch);
}

TEST_CASE("cumulative terms integrate the rates by the trapezoid rule") {
  oracle::Gen gen(68);
  const PeriodicGrid g(2, 10, 1.0);
  ModelParams p = params(0.5);
  p.nu = 0.7;
  p.epsilon = 0.05;
  const auto k = KernelTable::build(p, g);
  std::vector<StrongProxy> strong;
  std::vector<State> weak;
  for (int i = 0; i < 5; ++i) {
    strong.push_back(smooth_proxy(g, gen, 0.05 * i * i));
    strong.back().e_bar = VectorField(2, g.size(), 0.3);
    weak.push_back(random_state(g, gen));
    weak.back().time = strong.back().time;
  }
  for (auto mode : {RelativeMode::WeakStrong, RelativeMode::Relaxation}) {
    const RelativeEnergyReport rep = term_decomposition(weak, strong, p, k, mode);
    for (int j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (std::size_t i = 1; i < 5; ++i) {
        const auto a = term_rates(weak[i - 1], strong[i - 1], p, k, mode);
        const auto b = term_rates(weak[i], strong[i], p, k, mode);
        acc += 0.5 * (rep.times[i] - rep.times[i - 1]) * (a.terms[j] + b.terms[j]);
        CHECK(rep.terms[j][i] == doctest::Approx(acc).epsilon(1e-12));
      }
    }
    if (mode == RelativeMode::WeakStrong) {
      for (double v : rep.terms[3]) CHECK(v == 0.0);
    } else {
      CHECK(rep.terms[3].back() != 0.0);
    }
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(rep.kinetic_part[i] >= 0.0);
      CHECK(rep.internal_part[i] >= 0.0);
      CHECK(rep.psi_or_phi[i] == doctest::Approx(rep.kinetic_part[i] + rep.internal_part[i] + rep.interaction_part[i]));
    }
    std::stringstream ss;
    rep.write_csv(ss);
    std::string header;
    std::getline(ss, header);
    if (mode == RelativeMode::Relaxation) {
      CHECK(header == "t,total,kinetic,internal,interaction,dissipation,I1_or_J1,I2_or_J2,I3_or_J3,J4");
    } else {
      CHECK(header == "t,total,kinetic,internal,interaction,dissipation,I1_or_J1,I2_or_J2,I3_or_J3");
    }
  }
}

TEST_CASE("proxy from an Euler state") {
  const PeriodicGrid g(1, 8, 1.0);
  State s = State::at_rest(g, ScalarField(g.size(), 2.0), 0.3);
  for (double& m : s.mom[0]) m = 1.0;
  const StrongProxy p = proxy_from_state(s, g);
  CHECK(p.time == 0.3);
  CHECK(p.u_bar[0][5] == 0.5);
  CHECK(p.e_bar.dim() == 0);
}
