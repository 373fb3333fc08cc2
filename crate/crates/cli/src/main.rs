use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hvdw::cache;
use hvdw::coefficients::{self, CrossoverOutcome, PoleTailTerm};
use hvdw::config::RunConfig;
use hvdw::exec::Execution;
use hvdw::interaction::{radial_grid, PairModel, PairSpec};
use hvdw::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_TOLERANCE: u8 = 4;

/// Published D6 of nD-1S: (n, virtual P, virtual F, total) in Eh a0^6.
const TABLE1: [(u32, f64, f64, f64); 3] = [
    (8, 17459.439, 26156.866, 43616.296),
    (10, 43476.563, 65182.580, 108659.144),
    (12, 91115.328, 136640.733, 227756.061),
];

#[derive(Parser, Debug)]
#[command(
    name = "hvdw",
    version,
    about = "Long-range interaction of excited and ground-state hydrogen"
)]
struct Cli {
    /// Configuration file (flat key = value, TOML syntax).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override `basis_size`.
    #[arg(long, global = true)]
    basis_size: Option<usize>,

    /// Override `lamb_shift_ghz`.
    #[arg(long, global = true)]
    lamb_shift_ghz: Option<f64>,

    /// Override `fine_structure_constant`.
    #[arg(long, global = true)]
    fine_structure: Option<f64>,

    /// Run on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    /// Report energies in J and lengths in m instead of atomic units.
    #[arg(long, global = true)]
    si: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Van der Waals coefficients and asymptotic amplitudes of a pair.
    Coeff {
        /// Pair, e.g. 12D:1S, 8D:1S:m=0, 12D:1S:sym=-
        #[arg(long)]
        pair: String,
        #[arg(long, value_enum, default_value = "all")]
        kind: CoeffKind,
    },
    /// Energy breakdown on a grid of separations (CSV).
    Curve {
        #[arg(long)]
        pair: String,
        #[arg(long)]
        rmin: f64,
        #[arg(long)]
        rmax: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long, value_enum, default_value = "log")]
        spacing: Spacing,
        /// Output file; standard output when omitted and `output` is unset.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the published nD-1S D6 values and check them.
    Table1 {
        /// Relative tolerance; defaults to `table1_tolerance`.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Separation beyond which the pole envelope exceeds the Wick term.
    Crossover {
        #[arg(long)]
        pair: String,
        #[arg(long, default_value_t = 1e2)]
        lo: f64,
        #[arg(long, default_value_t = 1e12)]
        hi: f64,
        #[arg(long, default_value_t = 64)]
        points: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CoeffKind {
    D6,
    M6,
    Dbar6,
    Tails,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Spacing {
    Log,
    Linear,
}

/// Failure carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Quadrature { .. }
            | Error::Eigensolver { .. }
            | Error::NoCrossover { .. }
            | Error::Resonance { .. } => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn num(v: f64) -> String {
    // adding zero folds -0 into +0
    format!("{:.16e}", v + 0.0)
}

/// Sums tail terms that share a transition energy; drops vanishing ones.
fn merge_tails(terms: &[PoleTailTerm]) -> Vec<PoleTailTerm> {
    let mut merged: Vec<PoleTailTerm> = Vec::new();
    for t in terms {
        match merged
            .iter_mut()
            .find(|m| (m.gap - t.gap).abs() <= 1e-9 * t.gap.abs())
        {
            Some(m) => m.amplitude += t.amplitude,
            None => merged.push(*t),
        }
    }
    merged.retain(|t| t.amplitude != 0.0);
    merged
}

struct Ctx {
    config: RunConfig,
    si: bool,
}

impl Ctx {
    fn energy(&self) -> f64 {
        if self.si {
            self.config.si_energy_factor
        } else {
            1.0
        }
    }

    fn length(&self) -> f64 {
        if self.si {
            self.config.si_length_factor
        } else {
            1.0
        }
    }

    /// Conversion factor for E * L^k.
    fn coefficient(&self, k: i32) -> f64 {
        self.energy() * self.length().powi(k)
    }

    fn coefficient_unit(&self, k: i32) -> String {
        if self.si {
            format!("J m^{k}")
        } else {
            format!("Eh a0^{k}")
        }
    }

    fn execution(&self) -> Execution {
        self.config.execution
    }

    fn header(&self, out: &mut String, command: &str) {
        let c = &self.config;
        let _ = writeln!(out, "# hvdw {command}");
        let _ = writeln!(out, "# config fingerprint {}", c.fingerprint());
        let scale = |s: Option<f64>, d: &str| s.map_or(d.to_string(), |v| v.to_string());
        let _ = writeln!(
            out,
            "# basis size {} per channel, excited scale {}, ground scale {}, degeneracy threshold {:e} Eh",
            c.basis_size,
            scale(c.excited_scale, "1/n"),
            scale(c.ground_scale, "1"),
            c.degeneracy_threshold
        );
        let _ = writeln!(
            out,
            "# alpha {}, Lamb shift {} GHz, units {}",
            c.fine_structure_constant,
            c.lamb_shift_ghz,
            if self.si {
                "SI (J, m)"
            } else {
                "atomic (Eh, a0)"
            }
        );
    }

    fn pair(&self, text: &str) -> Result<PairSpec, Failure> {
        PairSpec::parse_with(text, self.config.averaging, self.config.symmetry)
            .map_err(|e| usage(e.to_string()))
    }

    fn model(&self, spec: PairSpec) -> Result<PairModel, Failure> {
        Ok(PairModel::new(spec, &self.config, cache::global())?)
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(n) = cli.basis_size {
        config.basis_size = n;
    }
    if let Some(l) = cli.lamb_shift_ghz {
        config.lamb_shift_ghz = l;
    }
    if let Some(a) = cli.fine_structure {
        config.fine_structure_constant = a;
    }
    if cli.sequential {
        config.execution = Execution::Sequential;
    }
    config.validate()?;
    Ok(config)
}

fn cmd_coeff(ctx: &Ctx, pair: &str, kind: CoeffKind) -> Result<String, Failure> {
    let spec = ctx.pair(pair)?;
    let mut out = String::new();
    ctx.header(&mut out, "coeff");
    let _ = writeln!(out, "# pair {spec}");
    let want = |k: CoeffKind| kind == k || kind == CoeffKind::All;
    // dbar6 of an nD state has a closed form that needs no spectra
    let closed = (spec.a.l() == 2 && spec.a.n() >= 3)
        .then(|| coefficients::dbar6_closed_form(spec.a.n()).ok())
        .flatten();
    let model = ctx.model(spec)?;
    let _ = writeln!(out, "quantity,value,unit");
    let c6 = ctx.coefficient(6);
    let u6 = ctx.coefficient_unit(6);
    if want(CoeffKind::D6) {
        let d = coefficients::d6_direct(&model)?;
        let (lo, hi) = channel_letters(spec.a.l());
        let _ = writeln!(out, "d6_{lo},{},{u6}", num(d.lower * c6));
        let _ = writeln!(out, "d6_{hi},{},{u6}", num(d.upper * c6));
        let _ = writeln!(out, "d6_total,{},{u6}", num(d.total * c6));
    }
    if want(CoeffKind::M6) {
        let m6 = coefficients::m6_mixing(&model)?;
        if !spec.has_mixing() {
            let _ = writeln!(out, "# m6: no exchange channel for atoms in the same level");
        } else if model.mixing_branches().next().is_none() {
            let _ = writeln!(
                out,
                "# m6: zero by the selection rule (needs l_A = l_B or |l_A - l_B| = 2)"
            );
        }
        let _ = writeln!(out, "m6,{},{u6}", num(m6 * c6));
        let _ = writeln!(out, "mbar6,{},{u6}", num(coefficients::mbar6(&model) * c6));
    }
    if want(CoeffKind::Dbar6) {
        let _ = writeln!(
            out,
            "dbar6,{},{u6}",
            num(coefficients::dbar6_numeric(&model) * c6)
        );
        if let Some(v) = closed {
            let _ = writeln!(out, "dbar6_closed_form,{},{u6}", num(v * c6));
        }
    }
    if want(CoeffKind::Tails) {
        let c7 = ctx.coefficient(7);
        let u7 = ctx.coefficient_unit(7);
        let _ = writeln!(
            out,
            "cp_amplitude_dir,{},{u7}",
            num(coefficients::cp_amplitude_direct(&model) * c7)
        );
        let _ = writeln!(
            out,
            "cp_amplitude_mix,{},{u7}",
            num(coefficients::cp_amplitude_mixing(&model) * c7)
        );
        let c2 = ctx.coefficient(2);
        let u2 = ctx.coefficient_unit(2);
        let (e, l) = (ctx.energy(), ctx.length());
        let inv_len = if ctx.si { "1/m" } else { "1/a0" };
        for (label, terms) in [
            ("dir", coefficients::pole_tail_terms_direct(&model)?),
            ("mix", coefficients::pole_tail_terms_mixing(&model)?),
        ] {
            for (k, t) in merge_tails(&terms).iter().enumerate() {
                let _ = writeln!(
                    out,
                    "pole_tail_{label}_{k}_gap,{},{}",
                    num(t.gap * e),
                    if ctx.si { "J" } else { "Eh" }
                );
                let _ = writeln!(
                    out,
                    "pole_tail_{label}_{k}_amplitude,{},{u2}",
                    num(t.amplitude * c2)
                );
                let _ = writeln!(
                    out,
                    "pole_tail_{label}_{k}_phase_rate,{},{inv_len}",
                    num(t.phase_rate / l)
                );
            }
        }
    }
    Ok(out)
}

fn channel_letters(l: u32) -> (String, String) {
    const LETTERS: &[u8] = b"spdfghik";
    let letter = |l: Option<u32>| {
        l.and_then(|l| LETTERS.get(l as usize))
            .map_or("none".into(), |&c| (c as char).to_string())
    };
    (letter(l.checked_sub(1)), letter(Some(l + 1)))
}

#[allow(clippy::too_many_arguments)]
fn cmd_curve(
    ctx: &Ctx,
    pair: &str,
    rmin: f64,
    rmax: f64,
    points: usize,
    spacing: Spacing,
) -> Result<String, Failure> {
    let spec = ctx.pair(pair)?;
    let grid = radial_grid(rmin, rmax, points, spacing == Spacing::Log)
        .map_err(|e| usage(e.to_string()))?;
    let model = ctx.model(spec)?;
    let rows = model.curve(&grid, ctx.execution())?;
    let mut out = String::new();
    ctx.header(&mut out, "curve");
    let _ = writeln!(
        out,
        "# pair {spec}, mixing sign {}",
        model.spec().mixing_sign()
    );
    let _ = writeln!(out, "# total = W_dir + P_dir + sign * (W_mix + P_mix)");
    let r_col = if ctx.si { "R_m" } else { "R_a0" };
    let _ = writeln!(
        out,
        "{r_col},W_dir,W_mix,P_dir,P_mix,Gamma_dir,Gamma_mix,total"
    );
    let (e, l) = (ctx.energy(), ctx.length());
    for b in rows {
        let fields = [
            b.r * l,
            b.w_dir * e,
            b.w_mix * e,
            b.p_dir * e,
            b.p_mix * e,
            b.gamma_dir * e,
            b.gamma_mix * e,
            b.total * e,
        ];
        let line: Vec<String> = fields.iter().map(|&v| num(v)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    Ok(out)
}

fn cmd_table1(ctx: &Ctx, tolerance: Option<f64>) -> Result<String, Failure> {
    let tol = tolerance.unwrap_or(ctx.config.table1_tolerance);
    if tol.is_nan() || tol <= 0.0 {
        return Err(usage("tolerance must be positive"));
    }
    let mut out = String::new();
    ctx.header(&mut out, "table1");
    let _ = writeln!(
        out,
        "# relative tolerance {tol:e}; reference values are in Eh a0^6"
    );
    let _ = writeln!(out, "n,channel,value,reference,relative_error");
    let mut worst: (f64, String) = (0.0, String::new());
    let c6 = ctx.coefficient(6);
    for (n, p_ref, f_ref, t_ref) in TABLE1 {
        let spec = ctx.pair(&format!("{n}D:1S"))?;
        let d = coefficients::d6_direct(&ctx.model(spec)?)?;
        for (channel, value, reference) in [
            ("P", d.lower, p_ref),
            ("F", d.upper, f_ref),
            ("total", d.total, t_ref),
        ] {
            let err = (value - reference).abs() / reference;
            if err > worst.0 || worst.1.is_empty() {
                worst = (err, format!("{n}D {channel}: {value:.9e} vs {reference}"));
            }
            let _ = writeln!(
                out,
                "{n},{channel},{},{},{}",
                num(value * c6),
                num(reference * c6),
                num(err)
            );
        }
    }
    if worst.0 > tol {
        print!("{out}");
        return Err(Failure {
            code: EXIT_TOLERANCE,
            message: format!(
                "published D6 values not reproduced: worst entry {} (relative error {:.3e} > {tol:e}); \
                 convergence warning: basis size {} may be too small",
                worst.1, worst.0, ctx.config.basis_size
            ),
        });
    }
    Ok(out)
}

fn cmd_crossover(
    ctx: &Ctx,
    pair: &str,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<String, Failure> {
    let spec = ctx.pair(pair)?;
    if !(lo > 0.0 && hi > lo) {
        return Err(usage("crossover bracket needs 0 < lo < hi"));
    }
    let model = ctx.model(spec)?;
    let mut out = String::new();
    ctx.header(&mut out, "crossover");
    let _ = writeln!(out, "# pair {spec}, bracket [{lo:e}, {hi:e}] a0");
    let _ = writeln!(out, "status,R,pole_envelope,wick");
    let (e, l) = (ctx.energy(), ctx.length());
    match coefficients::crossover_radius(&model, lo, hi, points, ctx.execution()) {
        Ok(CrossoverOutcome::Found {
            r,
            pole_envelope,
            wick,
        }) => {
            let _ = writeln!(
                out,
                "found,{},{},{}",
                num(r * l),
                num(pole_envelope * e),
                num(wick * e)
            );
            Ok(out)
        }
        Ok(CrossoverOutcome::NoPoleTerm) => {
            let _ = writeln!(out, "none,,,");
            let _ = writeln!(
                out,
                "# no crossover: the pair has no lower-lying states, the pole term vanishes"
            );
            Ok(out)
        }
        Err(err @ Error::NoCrossover { .. }) => {
            let _ = writeln!(out, "not-found,,,");
            print!("{out}");
            Err(err.into())
        }
        Err(err) => Err(err.into()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = load_config(&cli)?;
    let ctx = Ctx { config, si: cli.si };
    let (text, dest) = match cli.command {
        Command::Coeff { pair, kind } => (cmd_coeff(&ctx, &pair, kind)?, None),
        Command::Curve {
            pair,
            rmin,
            rmax,
            points,
            spacing,
            out,
        } => (
            cmd_curve(&ctx, &pair, rmin, rmax, points, spacing)?,
            out.or_else(|| ctx.config.output.clone()),
        ),
        Command::Table1 { tolerance } => (cmd_table1(&ctx, tolerance)?, None),
        Command::Crossover {
            pair,
            lo,
            hi,
            points,
        } => (cmd_crossover(&ctx, &pair, lo, hi, points)?, None),
    };
    match dest {
        Some(path) => {
            std::fs::write(&path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
