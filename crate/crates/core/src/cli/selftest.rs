//! Invariant suite run by `hbk selftest`. Each check is small enough for the
//! whole suite to finish in seconds.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::collision::{mollify, sigma_coll_alpha_integral, Backend, CollisionOperator, CollisionParams};
use crate::diagnostics::{fubini_swap_residual, symmetry_residual, DiagnosticsReport, QuadField};
use crate::dispersion_validation::{bessel_envelope_constant, bessel_f, bessel_j0_series};
use crate::error::Result;
use crate::evolution::{evolve, unitary_propagator, IntegratorConfig, Scheme};
use crate::field::WignerField;
use crate::lattice::{Dispersion, SignVector, TorusGrid};
use crate::spin::{matrix_inequality_residual, SpinMatrix};

fn nn_operator(d: usize, n: usize, params: CollisionParams) -> Result<CollisionOperator> {
    let grid = TorusGrid::new(d, n)?;
    CollisionOperator::new(Dispersion::nearest_neighbor(0.0).sample(&grid)?, params)
}

fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn check(name: &str, tol: f64, residual: f64) -> DiagnosticsReport {
    DiagnosticsReport::threshold(name, tol, vec![(0.0, residual)])
}

fn truncation(seed: u64) -> Result<Vec<DiagnosticsReport>> {
    let mut r = rng(seed, 1);
    let (mut clip, mut compl) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let m = SpinMatrix::random_hermitian(&mut r, 2.0);
        let phi = m.truncate()?;
        clip = clip.max(phi.max_abs_diff(&m.map_spectrum(|x| x.clamp(0.0, 1.0))));
        let one = SpinMatrix::identity();
        compl = compl.max((one - phi).max_abs_diff(&(one - m).truncate()?));
    }
    Ok(vec![
        check("truncation/eigen-clipping", 1e-12, clip),
        check("truncation/complement", 1e-13, compl),
    ])
}

fn j_map(seed: u64) -> DiagnosticsReport {
    let mut r = rng(seed, 2);
    let res = (0..1000)
        .map(|_| {
            let m = SpinMatrix::random_hermitian(&mut r, 1.0);
            m.j().j().max_abs_diff(&m)
        })
        .fold(0.0, f64::max);
    check("j-map/involution", 1e-15, res)
}

fn stationarity() -> Result<DiagnosticsReport> {
    let op = nn_operator(1, 16, CollisionParams::new(0.5))?;
    let mut res = 0.0f64;
    for w in [0.0, 0.25, 0.5, 1.0] {
        let c = op.collision_full(&WignerField::constant(*op.grid(), SpinMatrix::scalar(w)))?;
        res = res.max(c.norm_inf());
    }
    Ok(check("collision/constant-stationary", 1e-13, res))
}

fn conservation(seed: u64) -> Result<Vec<DiagnosticsReport>> {
    let mut r = rng(seed, 3);
    let (mut spin, mut energy) = (0.0f64, 0.0f64);
    for (d, n, eps) in [(1, 16, 0.6), (2, 8, 1.6)] {
        let op = nn_operator(d, n, CollisionParams::new(eps))?;
        for _ in 0..5 {
            let w = WignerField::random_hermitian(*op.grid(), &mut r, 1.0);
            let c = op.collision_full(&w)?;
            spin = spin.max(c.mean().norm());
            energy = energy.max((c.energy(op.band()) - op.off_shell_energy_rate(&w)?).abs());
        }
    }
    Ok(vec![
        check("collision/spin-conservation", 1e-12, spin),
        check("collision/energy-production-off-shell", 1e-12, energy).meta(
            "criterion",
            "energy production equals the off-shell prediction (nonzero at finite epsilon)",
        ),
    ])
}

fn tilde_symmetry(seed: u64) -> Result<DiagnosticsReport> {
    let mut r = rng(seed, 4);
    let op = nn_operator(1, 16, CollisionParams::new(0.5))?;
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let w = WignerField::random_fermi(*op.grid(), &mut r);
        worst = worst.max(symmetry_residual(&op, &w, 1e-12)?.max_residual());
    }
    Ok(check("collision/tilde-antisymmetry", 1e-12, worst))
}

fn positivity(seed: u64) -> Result<Vec<DiagnosticsReport>> {
    let mut r = rng(seed, 5);
    let mut triple = f64::INFINITY;
    for _ in 0..10_000 {
        let a = SpinMatrix::random_psd(&mut r, 1.0);
        let b = SpinMatrix::random_psd(&mut r, 1.0);
        let c = SpinMatrix::random_psd(&mut r, 1.0);
        triple = triple.min(matrix_inequality_residual(&a, &b, &c)?);
    }
    let op = nn_operator(1, 16, CollisionParams::new(0.5))?;
    let mut gain = f64::INFINITY;
    for _ in 0..20 {
        gain = gain.min(
            op.gain(&WignerField::random_fermi(*op.grid(), &mut r))?
                .min_eigenvalue(),
        );
    }
    Ok(vec![
        check("spin/matrix-inequality", 1e-10, (-triple).max(0.0)),
        check("collision/gain-positivity", 1e-10, (-gain).max(0.0)),
    ])
}

fn spectral_equivalence(seed: u64) -> Result<DiagnosticsReport> {
    let mut r = rng(seed, 6);
    let params = CollisionParams::new(0.5);
    let direct = nn_operator(1, 16, params)?;
    let spectral = nn_operator(1, 16, params.with_backend(Backend::Spectral))?;
    let w = WignerField::random_fermi(*direct.grid(), &mut r);
    let a = direct.collision_full(&w)?;
    let b = spectral.collision_full(&w)?;
    Ok(check(
        "collision/spectral-vs-direct",
        1e-6,
        a.dist_l2(&b) / a.norm_l2().max(1e-300),
    ))
}

fn sigma_normalization() -> Result<DiagnosticsReport> {
    let grid = TorusGrid::new(1, 16)?;
    let band = Dispersion::nearest_neighbor(0.0).sample(&grid)?;
    let eps = 0.2;
    let sigma = SignVector::COLLISION;
    let m = band.omega_tilde_bound(sigma) + 2000.0 * eps;
    let (_, _, integral) = sigma_coll_alpha_integral(&band, eps, 3, sigma, m, eps / 4.0)?;
    Ok(check(
        "collision/sigma-coll-normalization",
        1e-3,
        (integral - 1.0).abs(),
    ))
}

fn fubini(seed: u64) -> Result<DiagnosticsReport> {
    let mut r = rng(seed, 7);
    let grid = TorusGrid::new(1, 8)?;
    let band = Dispersion::nearest_neighbor(0.0).sample(&grid)?;
    let mut v = || -> Vec<Complex64> {
        (0..grid.len())
            .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
            .collect()
    };
    let g = QuadField::separable(grid, &v(), &v(), &v(), &v())?;
    let rep = fubini_swap_residual(&band, &g, SignVector::COLLISION, 0.3, 0.4, 1e-12)?;
    Ok(check("diagnostics/fubini-swap", 1e-12, rep.max_residual()))
}

fn dynamics(seed: u64) -> Result<Vec<DiagnosticsReport>> {
    let mut r = rng(seed, 8);
    let op = nn_operator(1, 16, CollisionParams::new(0.5))?;
    let cfg = IntegratorConfig {
        record_every: 10,
        ..IntegratorConfig::new(Scheme::ExpDuhamel, 0.025, 0.5)
    };
    let (mut min_eig, mut fermi) = (f64::INFINITY, 0.0f64);
    for _ in 0..3 {
        let w0 = WignerField::random_with_spectrum(*op.grid(), &mut r, 0.0, 0.6);
        let traj = evolve(&op, &w0, &cfg)?;
        for w in &traj.fields {
            min_eig = min_eig.min(w.min_eigenvalue());
        }
        fermi = fermi.max(traj.fermi_residual.iter().cloned().fold(0.0, f64::max));
    }
    let stationary = {
        let w0 = WignerField::constant(*op.grid(), SpinMatrix::scalar(0.5));
        let traj = evolve(&op, &w0, &IntegratorConfig::new(Scheme::Rk4, 0.025, 0.5))?;
        traj.last().expect("recorded").dist_inf(&w0)
    };
    Ok(vec![
        check("evolution/positivity-preserved", 1e-10, (-min_eig).max(0.0)),
        check("evolution/fermi-preserved", 1e-6, fermi),
        check("evolution/constant-stationary", 1e-10, stationary),
    ])
}

fn propagator(seed: u64) -> Result<DiagnosticsReport> {
    let mut r = rng(seed, 9);
    let grid = TorusGrid::new(1, 8)?;
    let hs: Vec<WignerField> = (0..10)
        .map(|_| WignerField::random_hermitian(grid, &mut r, 1.0))
        .collect();
    let u = unitary_propagator(&hs, 0.1)?;
    let res = u
        .iter()
        .map(|m| (*m * m.adjoint()).max_abs_diff(&SpinMatrix::identity()))
        .fold(0.0, f64::max);
    Ok(check("evolution/propagator-unitary", 1e-13, res))
}

fn mollifier(seed: u64) -> Result<DiagnosticsReport> {
    let mut r = rng(seed, 10);
    let w = WignerField::random_fermi(TorusGrid::new(2, 8)?, &mut r);
    let m = mollify(&w, 0.25)?;
    Ok(check("collision/mollifier-fermi", 1e-12, m.fermi_residual()))
}

fn bessel() -> Vec<DiagnosticsReport> {
    let res = (0..=200)
        .map(|i| {
            let x = 0.25 * i as f64;
            (bessel_f(x).re - bessel_j0_series(x)).abs()
        })
        .fold(0.0, f64::max);
    vec![
        check("dispersion/bessel-quadrature-vs-series", 1e-10, res),
        check("dispersion/bessel-envelope", 1.3, bessel_envelope_constant(50.0, 0.05)),
    ]
}

fn snapshot_round_trip(seed: u64) -> Result<DiagnosticsReport> {
    let mut r = rng(seed, 11);
    let w = WignerField::random_hermitian(TorusGrid::new(2, 4)?, &mut r, 1.0);
    let dir = std::env::temp_dir().join(format!("hbk-selftest-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("w.hbwf");
    super::io::write_snapshot(&path, &w, Some("selftest"))?;
    let (back, _) = super::io::read_snapshot(&path)?;
    let _ = std::fs::remove_dir_all(&dir);
    Ok(check("io/snapshot-round-trip", 0.0, back.dist_inf(&w)))
}

/// Runs every check; the suite passes iff every report passes.
pub fn run_suite(seed: u64) -> Result<Vec<DiagnosticsReport>> {
    let mut out = truncation(seed)?;
    out.push(j_map(seed));
    out.push(stationarity()?);
    out.extend(conservation(seed)?);
    out.push(tilde_symmetry(seed)?);
    out.extend(positivity(seed)?);
    out.push(spectral_equivalence(seed)?);
    out.push(sigma_normalization()?);
    out.push(fubini(seed)?);
    out.extend(dynamics(seed)?);
    out.push(propagator(seed)?);
    out.push(mollifier(seed)?);
    out.extend(bessel());
    out.push(snapshot_round_trip(seed)?);
    Ok(out)
}
