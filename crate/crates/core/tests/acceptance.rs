//! Acceptance checks, one PASS/FAIL line per criterion. Exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sbp_lab::advection::{theta_operator_check, AdvectionScheme, Boundary, Form, SchemeConfig};
use sbp_lab::burgers::BurgersScheme;
use sbp_lab::experiments::{
    cfl_max, conservation_error, convergence_error, run_burgers, scheme_spectrum, sweep,
    AdvectionSetup, EigenScenario, TableRow,
};
use sbp_lab::flux::{
    burgers_entropy_contribution, evaluate_flux, godunov_burgers, interface_energy_contribution,
    FluxKind, InterfaceTrace, Weight,
};
use sbp_lab::grid::{DiscreteField, Mesh, SpeedMode};
use sbp_lab::sbp::{build_operator, NodeFamily};
use sbp_lab::ssprk::integrate;

const FAMILIES: [NodeFamily; 2] = [NodeFamily::Lobatto, NodeFamily::Gauss];

/// Outcome of one criterion: pass flag and a one-line summary of the measured values.
type Outcome = Result<(bool, String), String>;

fn lib<T>(r: sbp_lab::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn setup(form: Form, flux: FluxKind, family: NodeFamily, speed_mode: SpeedMode) -> AdvectionSetup {
    AdvectionSetup {
        form,
        flux,
        family,
        speed_mode,
    }
}

fn fmt_rows(rows: &[TableRow]) -> String {
    rows.iter()
        .map(|r| match r.eoc {
            Some(e) => format!("N={} {:.3e} ({:.2})", r.n, r.error, e),
            None => format!("N={} {:.3e}", r.n, r.error),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn within_factor(value: f64, target: f64, factor: f64) -> bool {
    value <= target * factor && value >= target / factor
}

fn operators() -> Outcome {
    let mut worst_sbp = 0.0_f64;
    let mut failures = Vec::new();
    for family in FAMILIES {
        for p in 1..=20 {
            let op = lib(build_operator(family, p))?;
            let sbp = op.sbp_residual();
            worst_sbp = worst_sbp.max(sbp / (p + 1) as f64);
            if sbp > 1e-13 * (p + 1) as f64 {
                failures.push(format!("{family:?} p={p} sbp {sbp:e}"));
            }
            for k in 0..=p {
                let u: Vec<f64> = op.nodes.iter().map(|x| x.powi(k as i32)).collect();
                let du = op.d.mul_vec(&u);
                let d_ok = op.nodes.iter().zip(&du).all(|(x, d)| {
                    let exact = if k == 0 {
                        0.0
                    } else {
                        k as f64 * x.powi(k as i32 - 1)
                    };
                    (d - exact).abs() <= 1e-12
                });
                let (l, r) = op.restrict(&u);
                let r_ok =
                    (l - (-1.0_f64).powi(k as i32)).abs() <= 1e-12 && (r - 1.0).abs() <= 1e-12;
                if !d_ok || !r_ok {
                    failures.push(format!("{family:?} p={p} degree {k}"));
                }
            }
            let exact_to = match family {
                NodeFamily::Lobatto => 2 * p - 1,
                NodeFamily::Gauss => 2 * p + 1,
            };
            for k in 0..=exact_to {
                let q: f64 = op
                    .nodes
                    .iter()
                    .zip(&op.weights)
                    .map(|(x, w)| w * x.powi(k as i32))
                    .sum();
                let moment = if k % 2 == 1 {
                    0.0
                } else {
                    2.0 / (k as f64 + 1.0)
                };
                if (q - moment).abs() > 1e-12 {
                    failures.push(format!("{family:?} p={p} quadrature degree {k}"));
                }
            }
        }
    }
    Ok((
        failures.is_empty(),
        format!("max sbp residual / (p+1) {worst_sbp:.2e}; failures {failures:?}"),
    ))
}

fn nodal_scheme(
    form: Form,
    flux: FluxKind,
    family: NodeFamily,
    p: usize,
    boundary: Boundary,
    mesh: Mesh,
    a: &[f64],
    a_left: f64,
) -> Result<AdvectionScheme, String> {
    let cfg = SchemeConfig {
        form,
        interior_flux: flux,
        family,
        degree: p,
        speed_mode: SpeedMode::DirectOnNodes,
        boundary,
    };
    lib(AdvectionScheme::with_speeds(
        cfg,
        mesh,
        DiscreteField::new(a.to_vec(), p + 1),
        Arc::new(move |_| a_left),
    ))
}

fn weighted_inner(s: &AdvectionScheme, v: &[f64], w: &[f64]) -> f64 {
    let n = s.op.len();
    let j = s.mesh.jacobian();
    v.chunks(n)
        .zip(w.chunks(n))
        .map(|(a, b)| {
            (0..n)
                .map(|i| j * s.op.weights[i] * a[i] * b[i])
                .sum::<f64>()
        })
        .sum()
}

fn speed_volume_term(s: &AdvectionScheme, u: &[f64], a: &[f64]) -> f64 {
    let n = s.op.len();
    u.chunks(n)
        .zip(a.chunks(n))
        .map(|(ue, ae)| {
            let da = s.op.d.mul_vec(ae);
            (0..n)
                .map(|i| s.op.weights[i] * ue[i] * ue[i] * da[i])
                .sum::<f64>()
        })
        .sum()
}

fn rhs_of(s: &AdvectionScheme, u: &[f64]) -> Vec<f64> {
    let mut du = vec![0.0; u.len()];
    s.rhs(0.0, u, &mut du);
    du
}

fn product(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// Relative mismatch of every closed-form balance on one random draw.
fn energy_mismatches(
    rng: &mut ChaCha8Rng,
    family: NodeFamily,
    p: usize,
) -> Result<Vec<(&'static str, f64)>, String> {
    let mut out = Vec::new();
    let n = p + 1;
    let mut draw = |len: usize, lo: f64, hi: f64| -> Vec<f64> {
        (0..len).map(|_| rng.gen_range(lo..hi)).collect()
    };
    let u1 = draw(n, -2.0, 2.0);
    let a1 = draw(n, 0.3, 3.0);
    let u2 = draw(2 * n, -2.0, 2.0);
    let a2 = draw(2 * n, 0.3, 3.0);
    let g = draw(1, -2.0, 2.0)[0];
    let a_left = draw(1, 0.5, 2.5)[0];
    let rel = |lhs: f64, rhs: f64| (lhs - rhs).abs() / lhs.abs().max(1.0);
    let inflow = || Boundary::Inflow {
        g_left: Arc::new(move |_| g),
    };
    let one = || Mesh::new(-1.0, 0.6, 1).unwrap();
    let two = || Mesh::new(-1.0, 1.0, 2).unwrap();

    for (form, flux) in [
        (Form::SplitGeneral, FluxKind::SplitCentral),
        (Form::Unsplit, FluxKind::UnsplitUpwind),
    ] {
        let s = nodal_scheme(form, flux, family, p, inflow(), two(), &a2, a_left)?;
        let du = rhs_of(&s, &u2);
        let f = s.interface_fluxes(0.0, &u2);
        out.push((
            "mass telescoping",
            rel(weighted_inner(&s, &vec![1.0; 2 * n], &du), f[0] - f[2]),
        ));
    }

    let s = nodal_scheme(
        Form::SplitGeneral,
        FluxKind::SplitUpwind,
        family,
        p,
        inflow(),
        one(),
        &a1,
        a_left,
    )?;
    let du = rhs_of(&s, &u1);
    let (ul, ur) = s.op.restrict(&u1);
    let (al, ar) = s.op.restrict(&a1);
    let oracle =
        2.0 * ul * a_left * g - al * ul * ul - ar * ur * ur - speed_volume_term(&s, &u1, &a1);
    out.push((
        "split single element",
        rel(2.0 * weighted_inner(&s, &u1, &du), oracle),
    ));

    for flux in [FluxKind::SplitCentral, FluxKind::SplitUpwind] {
        let s = nodal_scheme(
            Form::SplitGeneral,
            flux,
            family,
            p,
            Boundary::Periodic,
            two(),
            &a2,
            1.0,
        )?;
        let du = rhs_of(&s, &u2);
        let traces = s.interface_traces(0.0, &u2);
        let fluxes = s.interface_fluxes(0.0, &u2);
        let faces: f64 = (0..2)
            .map(|i| interface_energy_contribution(Weight::Unweighted, &traces[i], fluxes[i]))
            .sum();
        out.push((
            "split two elements",
            rel(
                2.0 * weighted_inner(&s, &u2, &du),
                faces - speed_volume_term(&s, &u2, &a2),
            ),
        ));
    }

    let s = nodal_scheme(
        Form::Unsplit,
        FluxKind::UnsplitUpwind,
        family,
        p,
        inflow(),
        one(),
        &a1,
        a_left,
    )?;
    let du = rhs_of(&s, &u1);
    let au = product(&a1, &u1);
    let (aul, aur) = s.op.restrict(&au);
    let ag = a_left * g;
    out.push((
        "unsplit single element",
        rel(
            2.0 * weighted_inner(&s, &au, &du),
            ag * ag - aur * aur - (ag - aul) * (ag - aul),
        ),
    ));

    for flux in [
        FluxKind::UnsplitCentral,
        FluxKind::SplitCentral,
        FluxKind::EdgeUpwind,
    ] {
        let s = nodal_scheme(
            Form::Unsplit,
            flux,
            family,
            p,
            Boundary::Periodic,
            two(),
            &a2,
            1.0,
        )?;
        let du = rhs_of(&s, &u2);
        let traces = s.interface_traces(0.0, &u2);
        let fluxes = s.interface_fluxes(0.0, &u2);
        let faces: f64 = (0..2)
            .map(|i| interface_energy_contribution(Weight::SpeedWeighted, &traces[i], fluxes[i]))
            .sum();
        out.push((
            "unsplit two elements",
            rel(2.0 * weighted_inner(&s, &product(&a2, &u2), &du), faces),
        ));
    }

    let s = nodal_scheme(
        Form::NonconsGeneral,
        FluxKind::ModifiedUpwind,
        family,
        p,
        inflow(),
        one(),
        &a1,
        1.0,
    )?;
    let du = rhs_of(&s, &u1);
    let inv: Vec<f64> = a1.iter().map(|x| 1.0 / x).collect();
    let (ul, ur) = s.op.restrict(&u1);
    let oracle = g * g - ur * ur - (ul - g) * (ul - g);
    out.push((
        "noncons single element",
        rel(2.0 * weighted_inner(&s, &product(&inv, &u1), &du), oracle),
    ));

    for flux in [FluxKind::ModifiedCentral, FluxKind::ModifiedUpwind] {
        let s = nodal_scheme(
            Form::NonconsGeneral,
            flux,
            family,
            p,
            Boundary::Periodic,
            two(),
            &a2,
            1.0,
        )?;
        let du = rhs_of(&s, &u2);
        let inv: Vec<f64> = a2.iter().map(|x| 1.0 / x).collect();
        let traces = s.interface_traces(0.0, &u2);
        let fluxes = s.interface_fluxes(0.0, &u2);
        let faces: f64 = (0..2)
            .map(|i| {
                interface_energy_contribution(Weight::InverseSpeedWeighted, &traces[i], fluxes[i])
            })
            .sum();
        out.push((
            "noncons two elements",
            rel(2.0 * weighted_inner(&s, &product(&inv, &u2), &du), faces),
        ));
    }

    if family == NodeFamily::Lobatto {
        let s = nodal_scheme(
            Form::NonconsSimplified,
            FluxKind::SplitUpwind,
            family,
            p,
            inflow(),
            one(),
            &a1,
            a_left,
        )?;
        let du = rhs_of(&s, &u1);
        let inv: Vec<f64> = a1.iter().map(|x| 1.0 / x).collect();
        let (ul, ur) = s.op.restrict(&u1);
        let (al, _) = s.op.restrict(&a1);
        let oracle = 2.0 * ul * a_left * g / al - ul * ul - ur * ur;
        out.push((
            "noncons simplified single element",
            rel(2.0 * weighted_inner(&s, &product(&inv, &u1), &du), oracle),
        ));
    }

    let b = lib(BurgersScheme::new(lib(Mesh::new(0.0, 2.0, 2))?, family, p))?;
    let mut du = vec![0.0; 2 * n];
    b.rhs_burgers(0.0, &u2, &mut du);
    let j = b.mesh.jacobian();
    let rate: f64 = du
        .chunks(n)
        .zip(u2.chunks(n))
        .map(|(d, v)| {
            (0..n)
                .map(|i| j * b.op.weights[i] * d[i] * v[i])
                .sum::<f64>()
        })
        .sum();
    let faces: f64 = b
        .interface_states(&u2)
        .iter()
        .map(|&(m, q)| burgers_entropy_contribution(m, q, godunov_burgers(m, q)))
        .sum();
    out.push(("burgers entropy", rel(rate, faces)));
    Ok(out)
}

fn counterexamples() -> Result<Vec<(f64, f64)>, String> {
    let trace = InterfaceTrace {
        u_minus: 1.0,
        u_plus: 1.0,
        a_minus: 2.0,
        a_plus: 1.0,
        ..Default::default()
    };
    let mut out = vec![(
        interface_energy_contribution(
            Weight::Unweighted,
            &trace,
            evaluate_flux(FluxKind::SplitUpwind, &trace),
        ),
        1.0,
    )];
    let a = [1.0, 2.0, 1.0, 2.0];
    let u = [3.0, 1.0, 0.0, 0.0];
    let sqrt3 = 3.0_f64.sqrt();
    for (flux, expected) in [
        (FluxKind::SplitCentral, 2.5 - sqrt3 / 2.0),
        (FluxKind::SplitUpwind, 1.5 * sqrt3 - 2.0),
    ] {
        let s = nodal_scheme(
            Form::Unsplit,
            flux,
            NodeFamily::Gauss,
            1,
            Boundary::Periodic,
            lib(Mesh::new(-1.0, 1.0, 2))?,
            &a,
            1.0,
        )?;
        let traces = s.interface_traces(0.0, &u);
        let fluxes = s.interface_fluxes(0.0, &u);
        out.push((
            interface_energy_contribution(Weight::SpeedWeighted, &traces[1], fluxes[1]),
            expected,
        ));
    }
    Ok(out)
}

fn energy_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    let mut worst_name = "";
    for family in FAMILIES {
        for p in 1..=7 {
            for _ in 0..8 {
                for (name, m) in energy_mismatches(&mut rng, family, p)? {
                    if !(m <= worst) {
                        worst = m;
                        worst_name = name;
                    }
                }
            }
        }
    }
    let cases = counterexamples()?;
    let counter_err = cases.iter().map(|(v, e)| (v - e).abs()).fold(0.0, f64::max);
    let ok = worst <= 1e-10 && counter_err <= 1e-12;
    Ok((ok, format!("max relative mismatch {worst:.2e} ({worst_name}); counterexamples {:?} off by {counter_err:.1e}", cases.iter().map(|c| c.0).collect::<Vec<_>>())))
}

fn theta_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0_f64;
    for family in FAMILIES {
        for p in 1..=10 {
            let op = lib(build_operator(family, p))?;
            for _ in 0..10 {
                let a: Vec<f64> = (0..=p).map(|_| rng.gen_range(-2.0..2.0)).collect();
                worst = worst.max(theta_operator_check(&op, &a));
            }
        }
    }
    Ok((worst <= 1e-13, format!("max residual {worst:.2e}")))
}

fn eoc_close(rows: &[TableRow], expected: &[f64], tol: f64) -> bool {
    rows.iter()
        .skip(1)
        .zip(expected)
        .all(|(r, e)| matches!(r.eoc, Some(v) if (v - e).abs() <= tol))
}

fn convergence() -> Outcome {
    let ns = [16, 32, 64];
    let lobatto = setup(
        Form::SplitGeneral,
        FluxKind::SplitCentral,
        NodeFamily::Lobatto,
        SpeedMode::DirectOnNodes,
    );
    let gauss = setup(
        Form::SplitGeneral,
        FluxKind::SplitUpwind,
        NodeFamily::Gauss,
        SpeedMode::ViaLobattoInterpolation,
    );
    let lob_rows = lib(sweep(&[5], &ns, |p, n| convergence_error(lobatto, p, n)))?;
    let gauss_rows = lib(sweep(&[5], &ns, |p, n| convergence_error(gauss, p, n)))?;
    let lob_target = [1.16e-3, 2.15e-4, 8.76e-6];
    let gauss_target = [4.89e-4, 5.34e-5, 2.44e-6];
    let lob_ok = lob_rows
        .iter()
        .zip(lob_target)
        .all(|(r, t)| (r.error - t).abs() <= 0.05 * t)
        && eoc_close(&lob_rows, &[2.43, 4.62], 0.15);
    let gauss_ok = gauss_rows
        .iter()
        .zip(gauss_target)
        .all(|(r, t)| within_factor(r.error, t, 2.0))
        && eoc_close(&gauss_rows, &[3.19, 4.45], 0.15);
    Ok((
        lob_ok && gauss_ok,
        format!(
            "lobatto split central [{}] {}; gauss split upwind [{}] {}",
            fmt_rows(&lob_rows),
            if lob_ok { "ok" } else { "off" },
            fmt_rows(&gauss_rows),
            if gauss_ok { "ok" } else { "off" }
        ),
    ))
}

fn conservation() -> Outcome {
    let lobatto_cases = [
        (Form::SplitGeneral, FluxKind::SplitCentral),
        (Form::SplitGeneral, FluxKind::SplitUpwind),
        (Form::Unsplit, FluxKind::UnsplitCentral),
        (Form::Unsplit, FluxKind::UnsplitUpwind),
    ];
    let mut lobatto_worst = 0.0_f64;
    for (form, flux) in lobatto_cases {
        let s = setup(form, flux, NodeFamily::Lobatto, SpeedMode::DirectOnNodes);
        for row in lib(sweep(&[3], &[8, 16, 32, 64], |p, n| {
            conservation_error(s, p, n)
        }))? {
            lobatto_worst = lobatto_worst.max(row.error);
        }
    }
    let split = setup(
        Form::SplitGeneral,
        FluxKind::SplitCentral,
        NodeFamily::Gauss,
        SpeedMode::DirectOnNodes,
    );
    let split_rows = lib(sweep(&[3], &[8, 16, 32], |p, n| {
        conservation_error(split, p, n)
    }))?;
    let split_ok = split_rows
        .iter()
        .zip([8.41e-7, 2.64e-8, 8.25e-10])
        .all(|(r, t)| within_factor(r.error, t, 2.0))
        && eoc_close(&split_rows, &[5.0, 5.0], 0.15);
    let unsplit = setup(
        Form::Unsplit,
        FluxKind::UnsplitUpwind,
        NodeFamily::Gauss,
        SpeedMode::DirectOnNodes,
    );
    let unsplit_rows = lib(sweep(&[3], &[32, 64, 128], |p, n| {
        conservation_error(unsplit, p, n)
    }))?;
    let unsplit_ok =
        matches!(unsplit_rows.last().and_then(|r| r.eoc), Some(e) if (e - 5.0).abs() <= 0.2);
    Ok((
        lobatto_worst <= 1e-13 && split_ok && unsplit_ok,
        format!(
            "lobatto max {lobatto_worst:.2e}; gauss split central [{}]; gauss unsplit upwind [{}]",
            fmt_rows(&split_rows),
            fmt_rows(&unsplit_rows)
        ),
    ))
}

fn spectra() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let (p, n) = EigenScenario::PeriodicSin.default_resolution();
    for family in FAMILIES {
        for (form, flux) in [
            (Form::SplitGeneral, FluxKind::SplitCentral),
            (Form::Unsplit, FluxKind::UnsplitCentral),
            (Form::SplitGeneral, FluxKind::SplitUpwind),
            (Form::Unsplit, FluxKind::UnsplitUpwind),
        ] {
            let mode = EigenScenario::PeriodicSin.default_speed_mode(form, family);
            let scheme =
                lib(EigenScenario::PeriodicSin.scheme(setup(form, flux, family, mode), p, n))?;
            let s = lib(scheme_spectrum(&scheme, 0.0))?;
            let tol = 1e-8 * s.frobenius_norm;
            let pass = match flux {
                FluxKind::SplitCentral => s.abscissa > tol,
                FluxKind::UnsplitCentral => s.abscissa.abs() <= tol,
                _ => s.abscissa <= tol,
            };
            ok &= pass;
            parts.push(format!(
                "{:?} {} {} {:.2e}",
                family,
                form.name(),
                flux.name(),
                s.abscissa
            ));
        }
    }
    let (p, n) = EigenScenario::Manzanero.default_resolution();
    for (form, flux, family, expect_positive) in [
        (
            Form::NonconsSimplified,
            FluxKind::SplitCentral,
            NodeFamily::Lobatto,
            false,
        ),
        (
            Form::Unsplit,
            FluxKind::UnsplitCentral,
            NodeFamily::Gauss,
            false,
        ),
        (
            Form::Unsplit,
            FluxKind::SplitCentral,
            NodeFamily::Gauss,
            true,
        ),
    ] {
        let scheme = lib(EigenScenario::Manzanero.scheme(
            setup(form, flux, family, SpeedMode::DirectOnNodes),
            p,
            n,
        ))?;
        let s = lib(scheme_spectrum(&scheme, 0.0))?;
        let tol = 1e-8 * s.frobenius_norm;
        let pass = if expect_positive {
            s.abscissa > tol
        } else {
            s.abscissa <= tol
        };
        ok &= pass;
        parts.push(format!(
            "manzanero {:?} {} {} {:.2e}",
            family,
            form.name(),
            flux.name(),
            s.abscissa
        ));
    }
    Ok((ok, format!("abscissas: {}", parts.join("; "))))
}

fn stiffness_ratio() -> Outcome {
    let (p, n) = EigenScenario::NonperiodicCosh.default_resolution();
    let mut ok = true;
    let mut parts = Vec::new();
    for (form, flux) in [
        (Form::SplitGeneral, FluxKind::SplitCentral),
        (Form::SplitGeneral, FluxKind::SplitUpwind),
    ] {
        let magnitude = |family| -> Result<f64, String> {
            let mode = EigenScenario::NonperiodicCosh.default_speed_mode(form, family);
            let scheme =
                lib(EigenScenario::NonperiodicCosh.scheme(setup(form, flux, family, mode), p, n))?;
            Ok(lib(scheme_spectrum(&scheme, 0.0))?.max_magnitude)
        };
        let ratio = magnitude(NodeFamily::Lobatto)? / magnitude(NodeFamily::Gauss)?;
        ok &= (0.55..=0.85).contains(&ratio);
        parts.push(format!("{} {:.3}", flux.name(), ratio));
    }
    Ok((
        ok,
        format!("lobatto/gauss max |lambda|: {}", parts.join(", ")),
    ))
}

fn cfl() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (family, central, upwind) in [
        (NodeFamily::Lobatto, 3.0, 5.0),
        (NodeFamily::Gauss, 2.1, 3.1),
    ] {
        for (target, is_upwind) in [(central, false), (upwind, true)] {
            let mut values = Vec::new();
            for form in [Form::SplitGeneral, Form::Unsplit] {
                let flux = if is_upwind {
                    form.matching_upwind()
                } else {
                    form.matching_central()
                };
                let mode = if form == Form::SplitGeneral && family == NodeFamily::Gauss {
                    SpeedMode::ViaLobattoInterpolation
                } else {
                    SpeedMode::DirectOnNodes
                };
                values.push(lib(cfl_max(setup(form, flux, family, mode), 3, 256))?);
            }
            ok &= values.iter().all(|c| (c - target).abs() <= 0.2 + 1e-12)
                && (values[0] - values[1]).abs() <= 0.05 + 1e-12;
            parts.push(format!(
                "{:?} {} split {:.1} unsplit {:.1} (target {target})",
                family,
                if is_upwind { "upwind" } else { "central" },
                values[0],
                values[1]
            ));
        }
    }
    Ok((ok, parts.join("; ")))
}

fn burgers() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, target) in [(200, 7.47e-6), (400, 1.81e-7)] {
        let run = lib(run_burgers(NodeFamily::Gauss, 4, n))?;
        ok &= within_factor(run.error, target, 2.0) && run.mass_drift <= 1e-12;
        parts.push(format!(
            "N={n} error {:.3e} drift {:.1e}",
            run.error, run.mass_drift
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_rate = f64::NEG_INFINITY;
    for family in FAMILIES {
        for p in 1..=7 {
            let b = lib(BurgersScheme::new(lib(Mesh::new(0.0, 2.0, 6))?, family, p))?;
            for _ in 0..10 {
                let u: Vec<f64> = (0..b.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let mut du = vec![0.0; u.len()];
                b.rhs_burgers(0.0, &u, &mut du);
                let np = p + 1;
                let j = b.mesh.jacobian();
                let rate: f64 = du
                    .chunks(np)
                    .zip(u.chunks(np))
                    .map(|(d, v)| {
                        (0..np)
                            .map(|i| j * b.op.weights[i] * d[i] * v[i])
                            .sum::<f64>()
                    })
                    .sum();
                worst_rate = worst_rate.max(rate);
            }
        }
    }
    ok &= worst_rate <= 1e-12;
    parts.push(format!("max entropy rate {worst_rate:.2e}"));
    Ok((ok, parts.join("; ")))
}

fn observed_order(
    rhs: &dyn Fn(f64, &[f64], &mut [f64]),
    u0: f64,
    exact: f64,
) -> Result<f64, String> {
    let dts = [0.1, 0.05, 0.025, 0.0125];
    let errors: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            lib(integrate(rhs, &[u0], 0.0, 1.0, dt, |_, _| {})).map(|u| (u[0] - exact).abs())
        })
        .collect::<Result<_, _>>()?;
    let k = errors.len() - 1;
    Ok((errors[k - 1] / errors[k]).log2())
}

fn integrator_order() -> Outcome {
    let decay = observed_order(
        &|_, u: &[f64], du: &mut [f64]| {
            du[0] = -u[0];
        },
        1.0,
        (-1.0_f64).exp(),
    )?;
    // u' = u^2 from u(0) = 1/2 has u(1) = 1.
    let riccati = observed_order(
        &|_, u: &[f64], du: &mut [f64]| {
            du[0] = u[0] * u[0];
        },
        0.5,
        1.0,
    )?;
    let ok = (decay - 4.0).abs() <= 0.15 && (riccati - 4.0).abs() <= 0.15;
    Ok((
        ok,
        format!("observed orders {decay:.3} (decay), {riccati:.3} (u' = u^2)"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("operator correctness", operators),
        ("energy identities", energy_identities),
        ("theta identity", theta_identity),
        ("convergence", convergence),
        ("conservation", conservation),
        ("spectra", spectra),
        ("gauss/lobatto stiffness band", stiffness_ratio),
        ("cfl", cfl),
        ("burgers", burgers),
        ("integrator order", integrator_order),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match outcome {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name} [{secs:.1}s]: {detail}",
            if pass { "PASS" } else { "FAIL" },
            k + 1
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
