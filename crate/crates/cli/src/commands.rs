use gammaflow::birational::{assemble_blowup, check_sod_lattice, orlov_sod, BlowupPreset};
use gammaflow::charclasses::{check_gamma_ahat, euler_gram, euler_pairing};
use gammaflow::cohomology::ValidationReport;
use gammaflow::conjectures::{asymptotic_fit, gamma1_flat_form_test, gamma1_limit_test};
use gammaflow::data::{read_user_data, UserData};
use gammaflow::numerics::ZPoint;
use gammaflow::parallel::Schedule;
use gammaflow::quantum::{conjecture_o_check, euler_spectrum, hypersurface_pattern, QuantumAlgebra};
use gammaflow::sections::{monodromy_check, pairing_gram};
use gammaflow::space::Space;
use gammaflow::stokes::mutation::big_from_int;
use gammaflow::stokes::{
    asymptotic_basis, braid_orbit_search, identify_k_classes, stokes_matrix, stokes_pair, verify_rh_consistency, BasisOptions, MutationSystem,
    QdmPoint,
};
use gammaflow::{Error, PrecisionContext};
use rug::Float;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{BlowupCmd, CheckCmd, Command, Common, DataCmd, Gamma1Cmd, MutateFrom, RhCmd, RunConfig, ScheduleArg, StokesCmd};

/// Why a run stopped before producing a verdict.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or unreadable input: exit 2.
    Usage(String),
    /// The computation itself failed: exit 1 with a diagnostic report.
    Numerical(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numerical(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Plot data: a header row and decimal strings.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug)]
pub struct Outcome {
    pub passed: bool,
    /// One PASS/FAIL line per check, for the terminal.
    pub lines: Vec<String>,
    pub result: Value,
    pub table: Option<Table>,
}

impl Outcome {
    fn new(result: impl Serialize) -> Self {
        Outcome { passed: true, lines: Vec::new(), result: serde_json::to_value(result).expect("reports serialize"), table: None }
    }

    fn check(mut self, name: &str, ok: bool, detail: impl Into<String>) -> Self {
        self.passed &= ok;
        self.lines.push(format!("{} {name}: {}", if ok { "PASS" } else { "FAIL" }, detail.into()));
        self
    }
}

struct Run<'a> {
    c: &'a Common,
    ctx: PrecisionContext,
}

impl<'a> Run<'a> {
    fn new(c: &'a Common) -> Result<Self, Failure> {
        let ctx = PrecisionContext::with_digits(c.digits).map_err(|e| usage(e.to_string()))?;
        Ok(Run { c, ctx })
    }

    fn bits(&self) -> u32 {
        self.ctx.bits()
    }

    fn space(&self) -> Result<Space, Failure> {
        match (&self.c.space, &self.c.data) {
            (Some(name), _) => Space::parse(name).map_err(|e| usage(e.to_string())),
            (None, Some(_)) => {
                Err(usage("this command needs a built-in --space; data files are accepted by `check algebra`, `spectrum` and `data validate`"))
            }
            (None, None) => Err(usage("--space is required")),
        }
    }

    fn data(&self) -> Result<UserData, Failure> {
        let path = self.c.data.as_ref().ok_or_else(|| usage("--data is required"))?;
        read_user_data(path).map_err(|e| usage(e.to_string()))
    }

    fn schedule(&self) -> Schedule {
        match self.c.schedule {
            ScheduleArg::Parallel => Schedule::Parallel,
            ScheduleArg::Sequential => Schedule::Sequential,
        }
    }

    fn opts(&self) -> BasisOptions {
        BasisOptions { schedule: self.schedule(), ..Default::default() }
    }

    fn tol(&self, default: f64) -> f64 {
        self.c.tolerance.unwrap_or(default)
    }

    /// Default threshold for identities that hold exactly: twenty digits of headroom.
    fn identity_tol(&self) -> f64 {
        self.tol(10f64.powi(20 - self.c.digits as i32))
    }

    fn single(grid: &Option<crate::config::Grid>, flag: &str, default: f64) -> Result<f64, Failure> {
        match grid {
            None => Ok(default),
            Some(g) if g.0.len() == 1 => Ok(g.0[0]),
            Some(_) => Err(usage(format!("--{flag} takes a single value for this command"))),
        }
    }

    fn grid(grid: &Option<crate::config::Grid>, default: &[f64]) -> Vec<f64> {
        grid.as_ref().map_or_else(|| default.to_vec(), |g| g.0.clone())
    }

    fn t(&self) -> Result<ZPoint, Failure> {
        let abs = Self::single(&self.c.t, "t", 1.0)?;
        positive(abs, "t")?;
        Ok(ZPoint::from_f64(self.bits(), abs, self.c.t_arg))
    }

    fn z(&self) -> Result<ZPoint, Failure> {
        let abs = Self::single(&self.c.z, "z", 1.0)?;
        positive(abs, "z")?;
        Ok(ZPoint::from_f64(self.bits(), abs, self.c.z_arg))
    }

    fn phase(&self) -> Option<Float> {
        self.c.phase.map(|p| Float::with_val(self.bits(), p))
    }
}

fn positive(x: f64, flag: &str) -> Result<(), Failure> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(usage(format!("--{flag} must be positive")))
    }
}

fn axiom_lines(mut out: Outcome, reports: &[ValidationReport]) -> Outcome {
    for r in reports {
        for c in &r.checks {
            let detail = c.witness.clone().unwrap_or_else(|| "holds".into());
            out = out.check(&format!("{} {}", r.algebra, c.axiom), c.passed, detail);
        }
    }
    out
}

pub fn run(config: &RunConfig) -> Result<Outcome, Failure> {
    let r = Run::new(&config.common)?;
    if config.common.csv.is_some() && !matches!(config.command, Command::Gamma1(Gamma1Cmd::Limit | Gamma1Cmd::FlatForm) | Command::Rh(_)) {
        return Err(usage("--csv is available for `gamma1 limit`, `gamma1 flat-form` and `rh verify`"));
    }
    match &config.command {
        Command::Check(c) => check(&r, c),
        Command::Spectrum => spectrum(&r),
        Command::Gamma1(c) => gamma1(&r, c),
        Command::Stokes(c) => stokes(&r, c),
        Command::Rh(RhCmd::Verify { samples }) => rh(&r, *samples),
        Command::Blowup(BlowupCmd::Check { preset }) => blowup(preset),
        Command::Data(DataCmd::Validate) => data_validate(&r),
    }
}

fn check(r: &Run, cmd: &CheckCmd) -> Result<Outcome, Failure> {
    match cmd {
        CheckCmd::Algebra => {
            let reports = if r.c.data.is_some() && r.c.space.is_none() {
                r.data()?.validate()
            } else {
                let s = r.space()?;
                vec![s.algebra().validate(), s.quantum.validate()]
            };
            Ok(axiom_lines(Outcome::new(&reports), &reports))
        }
        CheckCmd::GammaIdentity => {
            let s = r.space()?;
            let rep = check_gamma_ahat(&s.tangent, &r.ctx);
            let tol = r.identity_tol();
            let ok = rep.max_residual < tol;
            let detail = format!("max residual {:e} (tolerance {tol:e})", rep.max_residual);
            Ok(Outcome::new(&rep).check("Gamma-Ahat identity", ok, detail))
        }
        CheckCmd::Hrr => {
            let s = r.space()?;
            let basis = s.k_basis()?;
            let exact = euler_gram(&s.tangent, &basis)?;
            let tol = r.identity_tol();
            let values: Vec<Vec<_>> =
                basis.elements.iter().map(|v| basis.elements.iter().map(|w| euler_pairing(&s.tangent, v, w, &r.ctx)).collect()).collect();
            let worst = values.iter().flatten().map(|v| v.distance).fold(0.0, f64::max);
            let agree = values.iter().zip(&exact).all(|(row, e)| row.iter().zip(e).all(|(v, &x)| v.integer == x));
            let out = Outcome::new(json!({ "labels": basis.elements.iter().map(|e| &e.label).collect::<Vec<_>>(), "gram": exact, "values": values }));
            Ok(out.check("integrality", worst < tol, format!("largest distance to an integer {worst:e}")).check(
                "exact agreement",
                agree,
                format!("Gram {exact:?}"),
            ))
        }
        CheckCmd::Pairing => {
            let s = r.space()?;
            let (_, rep) = pairing_gram(&s, &s.k_basis()?, &r.t()?, &r.z()?, &r.ctx)?;
            let tol = r.identity_tol();
            let detail = format!("Gram {:?}, max residual {:e}", rep.expected, rep.max_residual);
            let ok = rep.max_residual < tol;
            Ok(Outcome::new(&rep).check("pairing equals Euler form", ok, detail))
        }
        CheckCmd::Monodromy => {
            let s = r.space()?;
            let degs = r.c.bundle.clone().unwrap_or_else(|| vec![0; s.factors.len()]);
            let v = s.line_bundle(&degs).map_err(|e| usage(e.to_string()))?;
            let rep = monodromy_check(&s, &v, &r.t()?, &r.z()?, &r.ctx)?;
            let tol = r.identity_tol();
            let mut out = Outcome::new(&rep).check("z-loop", rep.z_loop_residual < tol, format!("residual {:e}", rep.z_loop_residual));
            if let Some(x) = rep.tau_shift_residual {
                out = out.check("tau-shift", x < tol, format!("residual {x:e}"));
            }
            if let Some(x) = rep.composed_residual {
                out = out.check("composed loop", x < tol, format!("residual {x:e}"));
            }
            Ok(out)
        }
    }
}

fn spectrum_of(r: &Run, qa: &QuantumAlgebra, hyper: Option<(u32, u32)>) -> Result<Outcome, Failure> {
    let t = r.t()?;
    let spec = euler_spectrum(qa, &qa.q_from_t(&t))?;
    let o = conjecture_o_check(&spec);
    let pattern = hyper.map(|(n, d)| hypersurface_pattern(&spec, n, d, &r.ctx)).transpose()?;
    let report = spec.report();
    let mut out = Outcome::new(json!({ "spectrum": report, "conjecture_o": o, "hypersurface": pattern }));
    out = out.check("Conjecture O", o.passed, format!("T = {}, {}", o.t, o.detail));
    if let Some(p) = pattern {
        out = out.check("hypersurface pattern", p.matched, format!("expected T = {}, deviation {:e}", p.expected_t, p.max_deviation));
    }
    Ok(out)
}

fn spectrum(r: &Run) -> Result<Outcome, Failure> {
    if r.c.data.is_some() && r.c.space.is_none() {
        let d = r.data()?;
        let qa = d.quantum.as_ref().ok_or_else(|| usage("the data file has no quantum products"))?;
        spectrum_of(r, qa, d.hypersurface.as_ref().map(|h| (h.n, h.d)))
    } else {
        spectrum_of(r, &r.space()?.quantum, None)
    }
}

fn gamma1(r: &Run, cmd: &Gamma1Cmd) -> Result<Outcome, Failure> {
    let s = r.space()?;
    match cmd {
        Gamma1Cmd::Limit => {
            let grid = Run::grid(&r.c.t, &[25.0, 50.0, 100.0, 200.0]);
            let table = gamma1_limit_test(&s, &grid, &r.ctx, r.c.max_digits, r.schedule())?;
            let detail =
                format!("fitted α = {:.3}, exponential rate κ = {:.3} (spectral gap {:.3})", table.alpha, table.exp_rate, table.spectral_gap);
            let rows = table.rows.iter().map(|x| vec![x.t.to_string(), x.digits_used.to_string(), x.distance_decimal.clone()]).collect();
            let mut out = Outcome::new(&table).check("distance strictly decreasing", table.strictly_decreasing, detail);
            out.table = Some(Table { header: vec!["t", "digits", "distance"], rows });
            Ok(out)
        }
        Gamma1Cmd::FlatForm => {
            let grid = Run::grid(&r.c.z, &[0.1, 0.05, 0.02, 0.01, 0.005]);
            let rep = gamma1_flat_form_test(&s, &grid, &r.ctx, r.c.max_digits)?;
            let tol = r.tol(1e-3);
            let rows = rep
                .rows
                .iter()
                .map(|x| vec![x.z.to_string(), x.digits_used.to_string(), format!("{:e}", x.angle), format!("{:e}", x.anti_angle)])
                .collect();
            let mut out = Outcome::new(&rep)
                .check("angle to the Perron direction", rep.final_angle < tol, format!("{:e} at the smallest z (tolerance {tol:e})", rep.final_angle))
                .check("O(1) stays away", rep.min_anti_angle > 0.1, format!("smallest angle {:e}", rep.min_anti_angle));
            out.table = Some(Table { header: vec!["z", "digits", "angle", "anti_angle"], rows });
            Ok(out)
        }
        Gamma1Cmd::Fit => {
            let grid = Run::grid(&r.c.t, &[20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0, 55.0, 60.0]);
            let f = asymptotic_fit(&s, &grid, &r.ctx, r.schedule())?;
            let tol = r.tol(0.01);
            Ok(Outcome::new(&f).check("exponential rate", f.relative_t_error < tol, format!("T = {} against {}", f.fitted_t, f.spectrum_t)).check(
                "polynomial exponent",
                f.relative_exponent_error < 10.0 * tol,
                format!("{} against {}", f.fitted_exponent, f.expected_exponent),
            ))
        }
    }
}

fn stokes(r: &Run, cmd: &StokesCmd) -> Result<Outcome, Failure> {
    let s = r.space()?;
    let t = r.t()?;
    let point = QdmPoint::at(&s, &t, r.bits())?;
    let phase = r.phase();
    match cmd {
        StokesCmd::Compute => {
            let pair = stokes_pair(&point, phase.as_ref(), &r.ctx, r.opts())?;
            let (_, rep) = stokes_matrix(&pair)?;
            let tol = r.tol(1e-6);
            let out = Outcome::new(json!({ "plus": pair.plus.record(), "minus": pair.minus.record(), "stokes": rep }));
            Ok(out
                .check("integral", rep.max_integer_deviation < tol, format!("deviation {:e}, matrix {:?}", rep.max_integer_deviation, rep.integer))
                .check("unitriangular", rep.upper_unitriangular, format!("largest entry below the diagonal {:e}", rep.max_below_diagonal)))
        }
        StokesCmd::Identify { depth } => {
            let basis = asymptotic_basis(&point, phase.as_ref(), &r.ctx, r.opts())?;
            let reference = s.k_basis()?;
            let id = identify_k_classes(&s, &t, &basis, &reference, &r.ctx)?;
            let target = big_from_int(&euler_gram(&s.tangent, &reference)?);
            let search = id.gram.as_ref().map(|g| braid_orbit_search(&big_from_int(g), &target, *depth));
            let found = search.as_ref().is_some_and(|x| x.found());
            let out = Outcome::new(json!({ "basis": basis.record(), "identification": id, "braid_search": search }));
            Ok(out
                .check("integer classes", id.conclusive, format!("residual {:e}, classes {:?}", id.integer_residual, id.labels))
                .check("exceptional", !id.self_chi.is_empty() && id.self_chi.iter().all(|&x| x == 1), format!("χ(E,E) = {:?}", id.self_chi))
                .check("braid orbit reaches the reference Gram", found, format!("depth {depth}")))
        }
        StokesCmd::Mutate { word, from } => {
            let reference = s.k_basis()?;
            let start = match from {
                MutateFrom::Reference => MutationSystem::from_basis(&s.tangent, &reference, None)?,
                MutateFrom::Stokes => {
                    let basis = asymptotic_basis(&point, phase.as_ref(), &r.ctx, r.opts())?;
                    let id = identify_k_classes(&s, &t, &basis, &reference, &r.ctx)?;
                    if !id.conclusive {
                        return Err(Failure::Numerical(Error::Domain("the asymptotic basis was not identified with integer classes".into())));
                    }
                    MutationSystem::from_coordinates(&s.tangent, &reference, &id.coefficients, Some(basis.phase_record()))?
                }
            };
            let end = start.apply_word(word).map_err(|e| usage(e.to_string()))?;
            let out = Outcome::new(json!({ "start": start.record(), "word": word, "result": end.record() }));
            Ok(out.check("unimodular", end.is_unimodular(), format!("classes {:?}", end.labels())))
        }
    }
}

fn rh(r: &Run, samples: usize) -> Result<Outcome, Failure> {
    let s = r.space()?;
    let rep = verify_rh_consistency(&s, &r.t()?, r.phase().as_ref(), samples, &r.ctx, r.opts())?;
    let tol = r.tol(1e-8);
    let worst = [rep.max_residual_sector, rep.max_residual_d_plus, rep.max_residual_d_minus].into_iter().fold(0.0, f64::max);
    let rows = rep
        .samples
        .iter()
        .map(|x| vec![x.equation.clone(), x.region.clone(), x.abs_z.to_string(), x.arg_z.to_string(), format!("{:e}", x.residual)])
        .collect();
    let mut out = Outcome::new(&rep)
        .check("gluing equations", worst < tol, format!("max residual {worst:e} over {} samples", rep.samples.len()))
        .check("monodromy", rep.passed, if rep.failures.is_empty() { "consistent".into() } else { rep.failures.join("; ") });
    out.table = Some(Table { header: vec!["equation", "region", "abs_z", "arg_z", "residual"], rows });
    Ok(out)
}

fn blowup(preset: &str) -> Result<Outcome, Failure> {
    let preset: BlowupPreset = preset.parse().map_err(|e: Error| usage(e.to_string()))?;
    let data = assemble_blowup(preset)?;
    let rep = check_sod_lattice(&data, &orlov_sod(&data)?)?;
    let mut out = Outcome::new(&rep);
    for c in &rep.checks {
        out = out.check(&c.name, c.passed, c.detail.clone());
    }
    Ok(out)
}

fn data_validate(r: &Run) -> Result<Outcome, Failure> {
    let d = r.data()?;
    let reports = d.validate();
    let mut out = axiom_lines(Outcome::new(&reports), &reports);
    if let (Some(h), Some(qa), true) = (&d.hypersurface, &d.quantum, out.passed) {
        let spec = spectrum_of(r, qa, Some((h.n, h.d)))?;
        out.passed &= spec.passed;
        out.lines.extend(spec.lines);
        out.result = json!({ "axioms": out.result, "spectrum": spec.result });
    }
    Ok(out)
}
