//! The five subcommands. Each writes its files into an [`OutputDir`] and
//! returns the exit status it wants the process to end with.

use std::path::{Path, PathBuf};

use radial_spectra::analysis::{
    check_log_sobolev, check_mode_decay, check_no_interior_extremum, check_poincare, check_uniform_integrability,
    random_family, scaled_tail_ratio, vanish_at_boundary, DecayClass, DecayThresholds, PoincareVariant,
};
use radial_spectra::modes::{assemble_full_spectrum, sphere_multiplicity, SpectrumLevel};
use radial_spectra::oracles::comparison_function_residual;
use radial_spectra::solver::{refine_and_estimate_order, ConvergenceQuantity, ConvergenceReport, ManufacturedSolution};
use radial_spectra::{
    assemble, build_grid, build_mode_problem, solve_eigen, solve_poisson, BoundaryCondition, Error, ModeProblem,
    OperatorKind, RadialGrid, SpectralResult, WeightedFunction,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{exit, CliError};
use crate::output::{dat_columns, num, OutputDir, Report};

/// Number of seeded random radial test functions used by `verify`.
pub const FAMILY_SIZE: usize = 50;
/// Accepted band for observed convergence orders.
pub const ORDER_BAND: (f64, f64) = (1.8, 2.2);

fn grid(config: &RunConfig) -> Result<RadialGrid, CliError> {
    Ok(build_grid(config.r_max, config.n_cells)?)
}

fn problem(config: &RunConfig, k: u32, grid: &RadialGrid) -> Result<ModeProblem, CliError> {
    Ok(build_mode_problem(
        config.operator,
        config.m,
        k,
        grid.clone(),
        config.bc_outer,
    )?)
}

/// Solves every mode of the configured range, in parallel, in mode order.
pub fn solve_all_modes(config: &RunConfig) -> Result<Vec<SpectralResult>, CliError> {
    let grid = grid(config)?;
    let ks: Vec<u32> = config.modes.iter().collect();
    ks.par_iter()
        .map(|&k| {
            Ok(solve_eigen(
                &assemble(&problem(config, k, &grid)?),
                config.pairs_per_mode,
            )?)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub k: u32,
    pub n: u32,
    pub lambda: f64,
    pub multiplicity: u64,
    pub residual: f64,
}

pub const SPECTRUM_HEADER: &str = "k,n,lambda,multiplicity,residual";

/// Rows of `spectrum.csv`, sorted by eigenvalue and then by `k`.
pub fn spectrum_rows(config: &RunConfig, solved: &[SpectralResult]) -> Vec<SpectrumRow> {
    let mut rows: Vec<SpectrumRow> = solved
        .iter()
        .flat_map(|s| {
            let k = s.problem.k;
            s.eigenvalues
                .iter()
                .zip(&s.residuals)
                .enumerate()
                .map(move |(n, (&lambda, &residual))| SpectrumRow {
                    k,
                    n: n as u32,
                    lambda,
                    multiplicity: sphere_multiplicity(config.m, k),
                    residual,
                })
        })
        .collect();
    rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.k.cmp(&b.k)).then(a.n.cmp(&b.n)));
    rows
}

pub fn spectrum_csv(rows: &[SpectrumRow]) -> String {
    let mut s = format!("{SPECTRUM_HEADER}\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.k,
            r.n,
            num(r.lambda),
            r.multiplicity,
            num(r.residual)
        ));
    }
    s
}

#[derive(Debug, Serialize)]
pub struct SpectrumPayload {
    pub levels: Vec<SpectrumLevel>,
}

pub fn cmd_spectrum(config: &RunConfig, out: &mut OutputDir) -> Result<i32, CliError> {
    let solved = solve_all_modes(config)?;
    let rows = spectrum_rows(config, &solved);
    let per_mode: Vec<(u32, Vec<f64>)> = solved.iter().map(|s| (s.problem.k, s.eigenvalues.clone())).collect();
    let levels = assemble_full_spectrum(config.m, &per_mode, config.merge_tol)?;
    out.write("spectrum.csv", &spectrum_csv(&rows))?;
    out.write(
        "spectrum.json",
        &Report::new("spectrum", config, SpectrumPayload { levels }).to_json(),
    )?;
    Ok(exit::OK)
}

pub fn cmd_eigenfunction(config: &RunConfig, k: u32, n: u32, out: &mut OutputDir) -> Result<i32, CliError> {
    if !config.modes.contains(k) {
        return Err(CliError::Config(format!(
            "k = {k} outside the configured modes {}..={}",
            config.modes.from, config.modes.to
        )));
    }
    if n as usize >= config.pairs_per_mode {
        return Err(CliError::Config(format!(
            "n = {n} outside the computed range 0..{}",
            config.pairs_per_mode
        )));
    }
    let grid = grid(config)?;
    let solved = solve_eigen(&assemble(&problem(config, k, &grid)?), n as usize + 1)?;
    let f = &solved.eigenfunctions[n as usize];
    out.write(&format!("eig_k{k}_n{n}.dat"), &dat_columns(grid.centers(), f.values()))?;
    Ok(exit::OK)
}

#[derive(Debug, Serialize)]
pub struct Section {
    pub name: String,
    /// Sections that report evidence without a pass/fail claim do not
    /// affect the exit status.
    pub adjudicated: bool,
    pub passed: usize,
    pub total: usize,
    pub error: Option<String>,
    pub checks: Vec<Value>,
}

#[derive(Debug, Serialize)]
pub struct VerifyPayload {
    pub family_seed: u64,
    pub family_size: usize,
    pub passed: usize,
    pub total: usize,
    pub sections: Vec<Section>,
}

impl VerifyPayload {
    pub fn exit_code(&self) -> i32 {
        if self.sections.iter().any(|s| s.error.is_some()) {
            exit::NUMERICAL
        } else if self.sections.iter().any(|s| s.adjudicated && s.passed < s.total) {
            exit::CHECK_FAILED
        } else {
            exit::OK
        }
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

type Checks = Vec<(bool, Value)>;
type CheckFn<'a> = dyn Fn(&Sample) -> Result<(bool, Value), CliError> + Sync + 'a;

fn section(name: &str, adjudicated: bool, run: impl FnOnce() -> Result<Checks, CliError>) -> Section {
    let (checks, error) = match run() {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(format!("{name}: {e}"))),
    };
    Section {
        name: name.to_string(),
        adjudicated,
        passed: checks.iter().filter(|c| c.0).count(),
        total: checks.len(),
        error,
        checks: checks.into_iter().map(|c| c.1).collect(),
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// Named radial test function.
struct Sample {
    name: String,
    f: WeightedFunction,
}

/// Band check with an allowance of a few ulps at the edges.
fn in_band(x: f64, (lo, hi): (f64, f64)) -> bool {
    const SLACK: f64 = 1e-12;
    x >= lo - SLACK && x <= hi + SLACK
}

pub const TAIL_BANDS: [(f64, (f64, f64)); 2] = [(10.0, (1.9, 2.1)), (20.0, (1.98, 2.02))];
pub const COMPARISON_RADII: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
pub const COMPARISON_TOL: f64 = 1e-6;
pub const INTEGRABILITY_THRESHOLDS: [f64; 5] = [0.1, 1e-2, 1e-3, 1e-4, 1e-6];

/// Runs the analysis battery.
pub fn verify_payload(config: &RunConfig) -> VerifyPayload {
    let m = config.m;
    let grid = grid(config);
    let family: Result<Vec<Sample>, CliError> = grid.as_ref().map_err(clone_err).and_then(|g| {
        random_family(config.seed, FAMILY_SIZE)
            .iter()
            .map(|p| {
                Ok(Sample {
                    name: p.describe(),
                    f: p.sample(g)?,
                })
            })
            .collect()
    });
    let radial_modes: Result<Vec<Sample>, CliError> = grid.as_ref().map_err(clone_err).and_then(|g| {
        let s = solve_eigen(&assemble(&problem(config, 0, g)?), config.pairs_per_mode)?;
        Ok(s.eigenfunctions
            .into_iter()
            .enumerate()
            .map(|(n, f)| Sample {
                name: format!("eigenfunction k=0 n={n}"),
                f,
            })
            .collect())
    });
    let angular: Result<Vec<SpectralResult>, CliError> = solve_all_modes(config);

    let with_family = |f: &CheckFn, include_modes: bool| {
        let family = family.as_ref().map_err(clone_err)?;
        let mut checks: Checks = family.par_iter().map(f).collect::<Result<_, _>>()?;
        if include_modes {
            let modes = radial_modes.as_ref().map_err(clone_err)?;
            checks.extend(modes.par_iter().map(f).collect::<Result<Checks, _>>()?);
        }
        Ok(checks)
    };

    let lsi = |s: &Sample| {
        let r = check_log_sobolev(&s.f, m)?.with_test_function(&s.name);
        Ok((r.passed, to_value(r)))
    };
    let poincare = |s: &Sample| {
        let r = check_poincare(&s.f, m, PoincareVariant::MeanCentered)?.with_test_function(&s.name);
        Ok((r.passed, to_value(r)))
    };
    let literal = |s: &Sample| {
        let cut = vanish_at_boundary(&s.f)?;
        let r = check_poincare(&cut, m, PoincareVariant::Literal)?
            .with_test_function(format!("{} · (1 - r²/r_max²)", s.name));
        Ok((r.passed, to_value(r)))
    };

    let sections = vec![
        section("log_sobolev", true, || with_family(&lsi, false)),
        section("log_sobolev_eigenfunctions", true, || {
            let modes = radial_modes.as_ref().map_err(clone_err)?;
            modes.iter().map(lsi).collect()
        }),
        section("poincare_mean_centered", true, || with_family(&poincare, true)),
        section("poincare_literal", false, || with_family(&literal, false)),
        section("uniform_integrability", true, || {
            let mut fs: Vec<WeightedFunction> = family
                .as_ref()
                .map_err(clone_err)?
                .iter()
                .map(|s| s.f.clone())
                .collect();
            fs.extend(radial_modes.as_ref().map_err(clone_err)?.iter().map(|s| s.f.clone()));
            let rep = check_uniform_integrability(&fs, m, &INTEGRABILITY_THRESHOLDS)?;
            let bounded = rep
                .levels
                .iter()
                .all(|l| l.epsilon <= rep.sup_square * l.tail_measure * (1.0 + 1e-12));
            Ok(vec![(rep.epsilon_monotone && bounded, to_value(rep))])
        }),
        section("tail_ratio", true, || {
            let mut checks = Vec::new();
            for dim in 3..=6 {
                for (r, band) in TAIL_BANDS {
                    let value = scaled_tail_ratio(r, dim)?;
                    let ok = in_band(value, band);
                    checks.push((
                        ok,
                        json!({"m": dim, "r": r, "value": value, "band": [band.0, band.1], "passed": ok}),
                    ));
                }
            }
            Ok(checks)
        }),
        section("comparison_function", true, || {
            let mut dims = vec![3, 4, m];
            dims.sort_unstable();
            dims.dedup();
            let mut checks = Vec::new();
            for dim in dims {
                for r in COMPARISON_RADII {
                    let value = comparison_function_residual(r, dim)?;
                    let exact = 14.0 * r * r + 4.0 * f64::from(dim);
                    let rel = (value - exact).abs() / exact;
                    let ok = rel <= COMPARISON_TOL;
                    checks.push((
                        ok,
                        json!({"m": dim, "r": r, "value": value, "exact": exact, "relative_error": rel, "passed": ok}),
                    ));
                }
            }
            Ok(checks)
        }),
        section("mode_decay", false, || {
            let solved = angular.as_ref().map_err(clone_err)?;
            let leading: Vec<WeightedFunction> = solved
                .iter()
                .filter(|s| s.problem.k >= 1)
                .map(|s| s.eigenfunctions[0].clone())
                .collect();
            if leading.is_empty() {
                return Ok(Vec::new());
            }
            let probes: Vec<f64> = (1..=5).map(|i| config.r_max * f64::from(i) / 6.0).collect();
            Ok(check_mode_decay(&leading, &probes, DecayThresholds::default())?
                .into_iter()
                .map(|d| (d.class == DecayClass::Vanishes, to_value(d)))
                .collect())
        }),
        section("maximum_principle", true, || {
            let solved = angular.as_ref().map_err(clone_err)?;
            let mut checks = Vec::new();
            for s in solved {
                let rs = s.problem.grid.centers();
                for (n, (f, &lambda)) in s.eigenfunctions.iter().zip(&s.eigenvalues).enumerate() {
                    let potential: Vec<f64> = rs.iter().map(|&r| s.problem.potential(lambda, r)).collect();
                    let rep = check_no_interior_extremum(f, &potential)?;
                    let ok = rep.violations.is_empty();
                    checks.push((
                        ok,
                        json!({"k": s.problem.k, "n": n, "lambda": lambda, "report": rep, "passed": ok}),
                    ));
                }
            }
            Ok(checks)
        }),
    ];
    let adjudicated = sections.iter().filter(|s| s.adjudicated);
    let (passed, total) = adjudicated.fold((0, 0), |(p, t), s| (p + s.passed, t + s.total));
    VerifyPayload {
        family_seed: config.seed,
        family_size: FAMILY_SIZE,
        passed,
        total,
        sections,
    }
}

fn clone_err(e: &CliError) -> CliError {
    match e {
        CliError::Config(s) => CliError::Config(s.clone()),
        CliError::Io { path, detail } => CliError::Io {
            path: path.clone(),
            detail: detail.clone(),
        },
        CliError::Numerical(s) => CliError::Numerical(s.clone()),
    }
}

pub fn cmd_verify(config: &RunConfig, out: &mut OutputDir) -> Result<i32, CliError> {
    let payload = verify_payload(config);
    let code = payload.exit_code();
    out.write("verify.json", &Report::new("verify", config, payload).to_json())?;
    Ok(code)
}

/// Right-hand side of the Poisson command.
#[derive(Debug, Clone, PartialEq)]
pub enum PoissonRhs {
    Manufactured,
    File(PathBuf),
}

#[derive(Debug, Serialize)]
pub struct PoissonPayload {
    pub rhs: String,
    pub k: u32,
    /// `‖K u - M f‖₂ / ‖M f‖₂`, 0 for a vanishing right-hand side.
    pub residual: f64,
    /// Relative `L²(dV_g)` error against the manufactured solution.
    pub relative_error: Option<f64>,
    pub sup_norm: f64,
}

/// Reads one sample per non-empty line; with several columns the last is
/// taken, so `r f(r)` tables are accepted. `#` starts a comment.
pub fn read_rhs_file(path: &Path, expected: usize) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut values = Vec::with_capacity(expected);
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        let Some(token) = line.split_whitespace().last() else {
            continue;
        };
        let v: f64 = token
            .parse()
            .map_err(|_| CliError::io(path, format!("line {}: cannot parse {token:?}", i + 1)))?;
        values.push(v);
    }
    if values.len() != expected {
        return Err(CliError::io(
            path,
            format!("expected {expected} samples (n_cells), found {}", values.len()),
        ));
    }
    Ok(values)
}

pub fn poisson_solution(
    config: &RunConfig,
    k: u32,
    rhs: &PoissonRhs,
) -> Result<(WeightedFunction, PoissonPayload), CliError> {
    if config.operator != OperatorKind::Quasi || config.bc() != BoundaryCondition::Dirichlet {
        return Err(CliError::Config(
            "operator/bc_outer: poisson needs the quasi operator with a dirichlet boundary".into(),
        ));
    }
    let grid = grid(config)?;
    let p = problem(config, k, &grid)?;
    let (f, label, exact) = match rhs {
        PoissonRhs::Manufactured => {
            if k != 0 {
                return Err(CliError::Config(format!(
                    "k: the manufactured solution is radial, got k = {k}"
                )));
            }
            let ms = ManufacturedSolution { m: config.m };
            (
                WeightedFunction::from_fn(&grid, 0, |r| ms.rhs(r))?,
                "manufactured".to_string(),
                Some(ms),
            )
        }
        PoissonRhs::File(path) => {
            let values = read_rhs_file(path, config.n_cells)?;
            (
                WeightedFunction::new(grid.clone(), values, k)?,
                path.display().to_string(),
                None,
            )
        }
    };
    let u = solve_poisson(&p, &f)?;
    let op = assemble(&p);
    let b: Vec<f64> = op.mass.iter().zip(f.values()).map(|(m, f)| m * f).collect();
    let ku = op.apply_stiffness(u.values());
    let res2: f64 = ku.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum();
    let b2: f64 = b.iter().map(|y| y * y).sum();
    let residual = if b2 > 0.0 { (res2 / b2).sqrt() } else { res2.sqrt() };
    let relative_error = exact.map(|ms| ms.relative_error(&p, &u)).transpose()?;
    let payload = PoissonPayload {
        rhs: label,
        k,
        residual,
        relative_error,
        sup_norm: u.sup_norm(),
    };
    Ok((u, payload))
}

pub fn cmd_poisson(config: &RunConfig, k: u32, rhs: &PoissonRhs, out: &mut OutputDir) -> Result<i32, CliError> {
    let (u, payload) = poisson_solution(config, k, rhs)?;
    out.write("poisson.dat", &dat_columns(u.grid().centers(), u.values()))?;
    out.write("poisson.json", &Report::new("poisson", config, payload).to_json())?;
    Ok(exit::OK)
}

/// What `converge` refines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergeTarget {
    /// 0-based eigenvalue index within mode `k`.
    Eigenvalue(usize),
    Poisson,
}

impl std::str::FromStr for ConvergeTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "poisson" {
            return Ok(ConvergeTarget::Poisson);
        }
        s.parse()
            .map(ConvergeTarget::Eigenvalue)
            .map_err(|_| format!("expected an eigenvalue index or \"poisson\", got {s:?}"))
    }
}

/// `n_cells/4, n_cells/2, n_cells`.
pub fn default_ladder(config: &RunConfig) -> Result<Vec<usize>, CliError> {
    let n = config.n_cells;
    if !n.is_multiple_of(4) || n / 4 < radial_spectra::measure::MIN_CELLS {
        return Err(CliError::Config(format!(
            "n_cells = {n} does not give a default ladder n/4, n/2, n; pass --ladder"
        )));
    }
    Ok(vec![n / 4, n / 2, n])
}

pub fn converge_report(
    config: &RunConfig,
    k: u32,
    target: ConvergeTarget,
    ladder: &[usize],
) -> Result<ConvergenceReport, CliError> {
    if ladder.len() < 3 {
        return Err(CliError::Config(format!(
            "ladder: at least 3 resolutions required, got {}",
            ladder.len()
        )));
    }
    let quantity = match target {
        ConvergeTarget::Eigenvalue(j) => ConvergenceQuantity::Eigenvalue(j),
        ConvergeTarget::Poisson => {
            if config.operator != OperatorKind::Quasi || config.bc() != BoundaryCondition::Dirichlet {
                return Err(CliError::Config(
                    "operator/bc_outer: poisson needs the quasi operator with a dirichlet boundary".into(),
                ));
            }
            ConvergenceQuantity::PoissonError
        }
    };
    let p = problem(config, k, &grid(config)?)?;
    refine_and_estimate_order(&p, quantity, ladder).map_err(|e| match e {
        Error::InvalidArgument(msg) => CliError::Config(format!("ladder: {msg}")),
        other => other.into(),
    })
}

pub fn converge_exit_code(report: &ConvergenceReport) -> i32 {
    match report.order {
        None => exit::INCONCLUSIVE,
        Some(p) if (ORDER_BAND.0..=ORDER_BAND.1).contains(&p) => exit::OK,
        Some(_) => exit::CHECK_FAILED,
    }
}

pub fn converge_csv(report: &ConvergenceReport) -> String {
    let mut s = String::from("n_cells,dr,value\n");
    for l in &report.levels {
        s.push_str(&format!("{},{},{}\n", l.n_cells, num(l.dr), num(l.value)));
    }
    s
}

pub fn cmd_converge(
    config: &RunConfig,
    k: u32,
    target: ConvergeTarget,
    ladder: Option<&[usize]>,
    out: &mut OutputDir,
) -> Result<i32, CliError> {
    let ladder = match ladder {
        Some(l) => l.to_vec(),
        None => default_ladder(config)?,
    };
    let report = converge_report(config, k, target, &ladder)?;
    let code = converge_exit_code(&report);
    out.write("converge.csv", &converge_csv(&report))?;
    out.write("converge.json", &Report::new("converge", config, report).to_json())?;
    Ok(code)
}
