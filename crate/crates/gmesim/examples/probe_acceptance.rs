//! Scratch probe for acceptance-test constants; not part of the suite.

use gmesim::classical::{classical_negativity, compute_phase_table, PhaseTable};
use gmesim::density::hermitian_eigenvalues;
use gmesim::geom::Vec3;
use gmesim::kernels::{hadamard_pair_functional, NumericsConfig};
use gmesim::quad::{integrate_with_breakpoints, QuadOptions};
use gmesim::quantum::perturbative_corrections;
use gmesim::retarded::pair_hamiltonian;
use gmesim::scanner::{ExperimentTemplate, GeometryFamily};
use gmesim::worldline::Worldline;

fn main() {
    let numerics = NumericsConfig::default();

    // C8: static and slowly-moving Newtonian limit.
    let g = 1.0;
    let (m1, m2, d) = (1.0, 1.0, 2.0);
    let w1 = Worldline::at_rest(m1, Vec3::new(0.0, 0.0, 0.0)).unwrap();
    let w2 = Worldline::at_rest(m2, Vec3::new(d, 0.0, 0.0)).unwrap();
    let h = pair_hamiltonian(&w1, &w2, 50.0, g).unwrap();
    println!("static: H = {h:.15e}, -Gm1m2/d = {:.15e}, rel {:.3e}", -g * m1 * m2 / d, (h + g * m1 * m2 / d).abs() * d);

    for (label, vel) in [
        ("longitudinal", Vec3::new(1e-3, 0.0, 0.0)),
        ("transverse", Vec3::new(0.0, 1e-3, 0.0)),
    ] {
        let t = 30.0;
        let wm = Worldline::uniform(m2, Vec3::new(d, 0.0, 0.0), vel).unwrap();
        let h = pair_hamiltonian(&w1, &wm, t, g).unwrap();
        let pos = wm.position(t).unwrap();
        let d_now = (pos - w1.position(t).unwrap()).norm();
        let newton = -g * m1 * m2 / d_now;
        println!("{label}: H = {h:.12e}, newton(now) = {newton:.12e}, rel dev {:.3e}", ((h - newton) / newton).abs());
    }

    // C4: remainder contraction under G-halving.
    let template = ExperimentTemplate {
        m1: 2.0,
        m2: 0.5,
        separation: 2.0,
        offset: 2.0,
        window: 60.0,
        coupling: 1.0,
        family: GeometryFamily::Static,
    };
    let config = template.build().unwrap();
    let table0 = compute_phase_table(&config, 1.0, &numerics).unwrap();
    let dcomb = table0.combination();
    let g0 = 0.3 / (std::f64::consts::PI * dcomb.abs());
    let rem = |g: f64| {
        let t = PhaseTable { delta: table0.delta, coupling: g };
        (classical_negativity(&t, true) - classical_negativity(&t, false)).abs()
    };
    let (r0, r1, r2) = (rem(g0), rem(g0 / 2.0), rem(g0 / 4.0));
    println!("C4: remainders {r0:.6e} {r1:.6e} {r2:.6e}; ratios {:.4} {:.4}", r0 / r1, r1 / r2);

    // C9: min-eigenvalue scaling of the assembled state.
    let template9 = ExperimentTemplate { separation: 1.0, window: 30.0, m1: 1.0, m2: 0.5, offset: 2.0, coupling: 1.0, family: GeometryFamily::Static };
    let cfg9 = template9.build().unwrap();
    for gq in [1e-2, 5e-3, 2.5e-3] {
        let state = perturbative_corrections(&cfg9, gq, &numerics).unwrap();
        let min = hermitian_eigenvalues(state.total()).into_iter().fold(f64::INFINITY, f64::min);
        println!("C9: g={gq:.3e} min_eig={min:.6e} C={:.4}", -min / (gq * gq));
    }

    // C2: hand PV oracle vs production Hadamard for (T, d) pairs.
    for (window, d) in [(100.0, 1.0), (1000.0, 1.0), (100.0, 10.0)] {
        let (m1, m2) = (1.3, 0.7);
        let w1 = Worldline::at_rest(m1, Vec3::new(0.0, 0.0, 0.0)).unwrap();
        let w2 = Worldline::at_rest(m2, Vec3::new(d, 0.0, 0.0)).unwrap();
        let numeric = hadamard_pair_functional(&w1, &w2, window, &numerics).unwrap();
        // PV of the square-window integral, reduced exactly to
        // 2∫₀ᵀ (T−u)/(d²−u²) du with a symmetric hole at the pole.
        let opts = QuadOptions { tol_abs: 1e-13, tol_rel: 1e-12, max_splits: 60_000 };
        let hole = 1e-7 * d;
        let f = |u: f64| (window - u) / (d * d - u * u);
        let left = integrate_with_breakpoints(f, 0.0, d - hole, &[d - 2.0 * hole], &opts);
        let right = integrate_with_breakpoints(f, d + hole, window, &[d + 2.0 * hole, 2.0 * d], &opts);
        let pv = 2.0 * (left.value + right.value);
        let oracle = m1 * m2 / (2.0 * std::f64::consts::PI * std::f64::consts::PI) * pv;
        println!(
            "C2 (T={window}, d={d}): numeric {:.10e} oracle {oracle:.10e} rel {:.3e}",
            numeric.value,
            ((numeric.value - oracle) / oracle).abs()
        );
    }
}
