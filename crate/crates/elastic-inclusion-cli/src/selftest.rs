//! Invariant checks on built-in disk and ellipse fixtures.

use elastic_inclusion::field::{FieldEvaluator, ResidualOptions};
use elastic_inclusion::oracle::{compare, solve_oracle};
use elastic_inclusion::system::{assemble, solve, SolveOptions};
use elastic_inclusion::{Complex64 as C, ConformalMap, DensitySolution, GeometryBundle, LoadingSpec, MaterialPair, Result};

use crate::run::angles;

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

type Fixture = fn() -> Result<(bool, String)>;

fn disk() -> Result<ConformalMap> {
    ConformalMap::new(1.0, vec![C::new(0.5, 0.0)])
}

fn ellipse() -> Result<ConformalMap> {
    ConformalMap::new(1.2, vec![C::new(0.5, 0.0), C::new(0.3, 0.0)])
}

fn cavity() -> Result<MaterialPair> {
    MaterialPair::cavity(1.5, 0.8)
}

fn inclusion() -> Result<MaterialPair> {
    MaterialPair::transmission(1.5, 0.8, 3.0, 2.4)
}

fn run(map: &ConformalMap, mat: &MaterialPair, spec: &LoadingSpec, n: usize) -> Result<DensitySolution> {
    solve(&assemble(mat, &GeometryBundle::new(map, n), spec)?, SolveOptions::default())
}

fn rel(got: C, want: C) -> f64 {
    (got - want).norm() / want.norm()
}

fn disk_closed_form() -> Result<(bool, String)> {
    let (map, mat) = (disk()?, cavity()?);
    let mut worst: f64 = 0.0;
    for m in 1..=3usize {
        let bm = C::new(0.4 * m as f64, -0.3);
        let sol = run(&map, &mat, &LoadingSpec::b_mode(m, bm), 16)?;
        let want = -bm.conj() * 2.0 * m as f64 / mat.beta();
        worst = worst.max(rel(sol.exterior_coefficient(-(m as i64)), want));
        worst = worst.max(sol.exterior_coefficient(m as i64).norm() / want.norm());
    }
    Ok((worst <= 1e-10, format!("max relative error {worst:.2e}")))
}

fn ellipse_closed_form() -> Result<(bool, String)> {
    let (map, mat) = (ellipse()?, cavity()?);
    let (g, a) = (map.gamma(), map.coeff(1));
    let b = C::new(0.6, -0.3);
    let k = mat.exterior();
    let xe = (b * a + b.conj() * a.conj() * k.kappa) * 2.0 * (k.lambda + 2.0 * k.mu) * g.powi(3)
        / (g.powi(4) - a.norm_sqr());
    let xi = -b.conj() * 2.0 * g / k.beta - a * xe / (g * g);
    let sol = run(&map, &mat, &LoadingSpec::b_mode(1, b), 16)?;
    let e = rel(sol.exterior_coefficient(1), xe).max(rel(sol.exterior_coefficient(-1), xi));
    Ok((e <= 1e-8, format!("relative error {e:.2e}")))
}

fn zero_loading() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for mat in [cavity()?, inclusion()?] {
        let sol = run(&ellipse()?, &mat, &LoadingSpec::zero(), 12)?;
        worst = worst.max(sol.full_vector(sol.mode).iter().fold(0.0, |s, z| s.max(z.norm())));
    }
    Ok((worst == 0.0, format!("largest coefficient {worst:e}")))
}

fn pairing() -> Result<(bool, String)> {
    let spec = LoadingSpec::new(vec![C::new(0.2, 0.1)], vec![C::new(1.0, 0.0)])?;
    let mut ok = true;
    for map in [disk()?, ellipse()?] {
        for mat in [cavity()?, inclusion()?] {
            ok &= assemble(&mat, &GeometryBundle::new(&map, 10), &spec)?.check_pairing();
        }
    }
    Ok((ok, "odd block rows conjugate the even ones".into()))
}

fn boundary_conditions() -> Result<(bool, String)> {
    let spec = LoadingSpec::new(vec![C::new(0.3, 0.2)], vec![C::new(1.0, -0.5), C::new(0.0, 0.2)])?;
    let th = angles(32);
    let opts = ResidualOptions::default();
    let mut worst: f64 = 0.0;
    for map in [disk()?, ellipse()?] {
        for mat in [cavity()?, inclusion()?] {
            let sol = run(&map, &mat, &spec, 16)?;
            let ev = FieldEvaluator::new(&sol, &spec, &map, &mat)?;
            let r = if mat.is_cavity() {
                ev.traction_variation(&th, opts)?
            } else {
                let (d, t) = ev.transmission_residual(&th, opts)?;
                d.max(t)
            };
            worst = worst.max(r);
        }
    }
    Ok((worst <= 1e-8, format!("largest boundary residual {worst:.2e}")))
}

fn oracle_disk() -> Result<(bool, String)> {
    let (map, mat) = (disk()?, inclusion()?);
    let spec = LoadingSpec::b_mode(1, C::new(1.0, 0.0));
    let sol = run(&map, &mat, &spec, 16)?;
    let ev = FieldEvaluator::new(&sol, &spec, &map, &mat)?;
    let rep = compare(&solve_oracle(&map, &mat, &spec, 128)?, &ev, &spec, 32)?;
    Ok((
        rep.boundary_max <= 1e-4,
        format!("boundary max {:.2e}, offset max {:.2e} at q = 128", rep.boundary_max, rep.offset_max),
    ))
}

pub fn run_all() -> Vec<Check> {
    let checks: [(&'static str, Fixture); 6] = [
        ("disk cavity closed form", disk_closed_form),
        ("ellipse cavity closed form", ellipse_closed_form),
        ("zero loading gives zero densities", zero_loading),
        ("block pairing", pairing),
        ("boundary conditions", boundary_conditions),
        ("oracle agreement on the disk", oracle_disk),
    ];
    checks
        .iter()
        .map(|&(name, f)| match f() {
            Ok((pass, detail)) => Check { name, pass, detail },
            Err(e) => Check {
                name,
                pass: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}
