//! Command-line front end: config schema, subcommands and file writers.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::NledError;
use crate::exact::{
    kappa_bound_from_timing, kappa_from_electron_radius, sqrt1pm1, transit_delay_exact,
    transit_delay_linear, BInterpretation, ExperimentDesign, Profile,
};
use crate::forms::{eb_from_two_form, two_form_from_eb};
use crate::nled::{LagrangianModel, ModelKind};
use crate::solver::{
    convergence_study, run_streaming, DustConfig, Grid1D, InitialCondition, RunConfig, RunEvent, RunSummary,
    Snapshot,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const OUTPUT_DIR_ENV: &str = "NLEDLAB_OUTPUT_DIR";

pub const DIAGNOSTICS_FILE: &str = "diagnostics.ndjson";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SNAPSHOT_COLUMNS: [&str; 7] = ["z", "E_x", "B_y", "D_x", "X", "Y", "Delta"];
pub const DUST_COLUMNS: [&str; 3] = ["rho_m", "p", "u"];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(#[from] NledError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) | CliError::Io(_) => EXIT_RUNTIME,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

// ---------------------------------------------------------------- config file

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: ModelSection,
    pub grid: GridSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub fluid: Option<FluidSection>,
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    #[serde(default)]
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub z0: f64,
    pub z1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    Gaussian,
    RaisedCosine,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSection {
    pub z: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub profile: ProfileName,
    #[serde(default)]
    pub amplitude: Option<f64>,
    #[serde(default)]
    pub width: Option<f64>,
    #[serde(default)]
    pub center: Option<f64>,
    #[serde(rename = "B0", default)]
    pub b0: f64,
    #[serde(default)]
    pub table: Option<TableSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidSection {
    pub eos: String,
    #[serde(default)]
    pub gamma: Option<f64>,
    pub rho_m0: f64,
    #[serde(default)]
    pub rho_e0: f64,
    #[serde(default)]
    pub u0: f64,
    #[serde(default)]
    pub rho_m_profile: Option<Profile>,
}

fn default_cfl() -> f64 {
    0.5
}

fn default_output_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    #[serde(default = "default_output_every")]
    pub output_every: usize,
    #[serde(default)]
    pub dissipation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Ndjson,
    Csv,
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Ndjson, OutputFormat::Csv]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub directory: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: None, formats: default_formats() }
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn profile(&self) -> CliResult<Profile> {
        let i = &self.initial;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| CliError::Config(format!("initial.{name} is required for this profile")))
        };
        let p = match i.profile {
            ProfileName::Gaussian => Profile::Gaussian {
                amplitude: need(i.amplitude, "amplitude")?,
                width: need(i.width, "width")?,
                center: i.center.unwrap_or(0.0),
            },
            ProfileName::RaisedCosine => Profile::RaisedCosine {
                amplitude: need(i.amplitude, "amplitude")?,
                width: need(i.width, "width")?,
                center: i.center.unwrap_or(0.0),
            },
            ProfileName::Tabulated => {
                let t = i
                    .table
                    .clone()
                    .ok_or_else(|| CliError::Config("initial.table is required for a tabulated profile".into()))?;
                let scale = i.amplitude.unwrap_or(1.0);
                Profile::Tabulated { z: t.z, values: t.values.iter().map(|v| v * scale).collect() }
            }
        };
        Ok(p)
    }

    /// Validated solver configuration.
    pub fn to_run_config(&self) -> CliResult<RunConfig> {
        if self.model.kind == ModelKind::Maxwell && self.model.kappa != 0.0 {
            return Err(CliError::Config("model.kappa must be 0 (or absent) for maxwell".into()));
        }
        let fluid = match &self.fluid {
            None => None,
            Some(f) => {
                if f.eos != "dust" {
                    return Err(CliError::Config(format!(
                        "fluid.eos = {:?}: the solver evolves cold dust only",
                        f.eos
                    )));
                }
                if f.gamma.is_some() {
                    return Err(CliError::Config("fluid.gamma has no meaning for dust".into()));
                }
                Some(DustConfig {
                    rho_m0: f.rho_m0,
                    rho_m_profile: f.rho_m_profile.clone(),
                    rho_e0: f.rho_e0,
                    u0: f.u0,
                })
            }
        };
        let rc = RunConfig {
            kind: self.model.kind,
            kappa: self.model.kappa,
            grid: Grid1D { n: self.grid.n, z0: self.grid.z0, z1: self.grid.z1 },
            initial: InitialCondition { profile: self.profile()?, b0: self.initial.b0 },
            fluid,
            cfl: self.run.cfl,
            t_end: self.run.t_end,
            output_every: self.run.output_every,
            dissipation: self.run.dissipation,
        };
        rc.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(rc)
    }

    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output.directory.clone().unwrap_or_else(|| PathBuf::from("nledlab_output")),
        }
    }
}

// ------------------------------------------------------------ serialisation

/// JSON formatter writing every float with 17 significant digits.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", fmt_f64(value))
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json_line<T: Serialize>(value: &T) -> CliResult<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser).map_err(io::Error::other)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn write_snapshot(path: &Path, snap: &Snapshot) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header: Vec<&str> = SNAPSHOT_COLUMNS.to_vec();
    if snap.dust.is_some() {
        header.extend(DUST_COLUMNS);
    }
    w.write_record(&header).map_err(csv_err)?;
    let f = &snap.fields;
    for i in 0..snap.z.len() {
        let mut row = vec![snap.z[i], f.e_x[i], f.b_y[i], f.d_x[i], f.x[i], f.y[i], f.delta[i]];
        if let Some(d) = &snap.dust {
            row.extend([d.rho_m(i), 0.0, d.u(i)]);
        }
        w.write_record(row.iter().map(|v| fmt_f64(*v))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(io::Error::other(e))
}

// ------------------------------------------------------------------ commands

#[derive(Debug, Parser)]
#[command(name = "nledlab", version, about = "Born-Infeld and Maxwell vacuum electrodynamics laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Maxwell,
    BornInfeld,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InterpretationArg {
    Tesla,
    FComponent,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate invariants, scalars, excitation and stress tensor at one field value.
    Point {
        #[arg(long, num_args = 3, value_names = ["EX", "EY", "EZ"], allow_negative_numbers = true, default_values_t = [0.0, 0.0, 0.0])]
        e: Vec<f64>,
        #[arg(long, num_args = 3, value_names = ["BX", "BY", "BZ"], allow_negative_numbers = true, default_values_t = [0.0, 0.0, 0.0])]
        b: Vec<f64>,
        #[arg(long, value_enum, default_value = "born-infeld")]
        kind: KindArg,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        eps0: f64,
    },
    /// Phase speed, transit delays and coupling estimates in SI units.
    Exact {
        /// magnet length in metres
        #[arg(long = "l0")]
        l0: f64,
        /// static field in tesla
        #[arg(long = "b")]
        b: f64,
        #[arg(long, default_value_t = 1e-22)]
        kappa: f64,
        /// timing resolution in seconds
        #[arg(long, default_value_t = 1e-12)]
        resolution: f64,
        #[arg(long, value_enum, default_value = "both")]
        interpretation: InterpretationArg,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
    },
    /// Run the 1+1D solver from a JSON config.
    Simulate { config: PathBuf },
    /// Evolve at successively doubled resolutions and fit the error order.
    Convergence {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
}

/// Parse `args` and run; returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "nledlab: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Point { e, b, kind, kappa, eps0 } => {
            let report = cmd_point([e[0], e[1], e[2]], [b[0], b[1], b[2]], kind, kappa, eps0)?;
            writeln!(out, "{}", to_json_line(&report)?)?;
        }
        Command::Exact { l0, b, kappa, resolution, interpretation, format } => {
            let report = cmd_exact(l0, b, kappa, resolution, interpretation)?;
            match format {
                ReportFormat::Json => writeln!(out, "{}", to_json_line(&report)?)?,
                ReportFormat::Csv => write_exact_csv(&report, out)?,
            }
        }
        Command::Simulate { config } => {
            let summary = cmd_simulate(&config)?;
            writeln!(out, "{}", to_json_line(&summary)?)?;
        }
        Command::Convergence { config, levels } => {
            let report = cmd_convergence(&config, levels)?;
            writeln!(out, "{}", to_json_line(&report)?)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    pub kind: ModelKind,
    pub kappa: f64,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Y")]
    pub y: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    /// `ℒ`
    pub lagrangian: f64,
    #[serde(rename = "L_X")]
    pub l_x: f64,
    #[serde(rename = "L_Y")]
    pub l_y: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "N")]
    pub n: f64,
    /// `2ℒ_Y`
    #[serde(rename = "L")]
    pub l: f64,
    /// `(tx, ty, tz, xy, xz, yz)` components of `G`
    #[serde(rename = "G")]
    pub g: [f64; 6],
    #[serde(rename = "D")]
    pub d: [f64; 3],
    #[serde(rename = "H")]
    pub h: [f64; 3],
    /// `T^{ab}`
    #[serde(rename = "T")]
    pub t: [[f64; 4]; 4],
}

pub fn cmd_point(e: [f64; 3], b: [f64; 3], kind: KindArg, kappa: f64, eps0: f64) -> CliResult<PointReport> {
    if !(e.iter().chain(&b).all(|v| v.is_finite()) && kappa >= 0.0 && kappa.is_finite() && eps0 > 0.0) {
        return Err(CliError::Config("fields must be finite, kappa >= 0 and eps0 > 0".into()));
    }
    let model = match kind {
        KindArg::Maxwell => LagrangianModel::maxwell(),
        KindArg::BornInfeld => LagrangianModel::born_infeld(kappa),
    }
    .with_eps0(eps0);
    let f = two_form_from_eb(e, b);
    let (x, y, s) = model.scalars_of(&f)?;
    let g = model.constitutive(&f)?;
    let (d, h) = eb_from_two_form(&g);
    let t = model.stress_energy(&f)?;
    let mut gc = [0.0; 6];
    gc.copy_from_slice(g.components());
    Ok(PointReport {
        kind: model.kind,
        kappa: model.kappa,
        x,
        y,
        delta: s.delta,
        lagrangian: s.lagrangian,
        l_x: s.l_x,
        l_y: s.l_y,
        m: s.m,
        n: s.n,
        l: s.l,
        g: gc,
        d,
        h,
        t: t.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpretedDelay {
    pub interpretation: BInterpretation,
    pub v_over_c: f64,
    pub one_minus_v_over_c: f64,
    pub tau_exact: f64,
    /// `None` without a field to bound against
    pub kappa_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactReport {
    pub design: ExperimentDesign,
    pub rows: Vec<InterpretedDelay>,
    pub tau_paper_linear: f64,
    pub kappa_electron_radius: f64,
    /// true where the linear formula differs from the exact delay by more than 1%
    pub formulas_disagree: bool,
    pub note: String,
}

pub fn cmd_exact(
    l0: f64,
    b: f64,
    kappa: f64,
    resolution: f64,
    interp: InterpretationArg,
) -> CliResult<ExactReport> {
    let design = ExperimentDesign { l0, b_tesla: b, kappa_si: kappa, timing_resolution: resolution };
    design.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let interps: &[BInterpretation] = match interp {
        InterpretationArg::Tesla => &[BInterpretation::Tesla],
        InterpretationArg::FComponent => &[BInterpretation::FComponent],
        InterpretationArg::Both => &[BInterpretation::Tesla, BInterpretation::FComponent],
    };
    let linear = transit_delay_linear(&design);
    let mut rows = Vec::new();
    let mut disagree = false;
    for &i in interps {
        let ckb = crate::exact::si::C * kappa * i.field_component(b);
        let x = ckb * ckb;
        let root = (1.0 + x).sqrt();
        let tau = transit_delay_exact(&design, i);
        disagree |= (tau - linear).abs() > 0.01 * tau.abs().max(linear.abs());
        rows.push(InterpretedDelay {
            interpretation: i,
            v_over_c: 1.0 / root,
            one_minus_v_over_c: sqrt1pm1(x) / root,
            tau_exact: tau,
            kappa_bound: if b > 0.0 { Some(kappa_bound_from_timing(&design, i)?) } else { None },
        });
    }
    let note = if disagree {
        "the linear delay (L0/2)*kappa*|B| is not the small-coupling limit of the exact delay \
         (L0/c)*(sqrt(1 + c^2 kappa^2 B^2) - 1), which is quadratic in kappa; the exact value is authoritative"
            .to_string()
    } else {
        "linear and exact delays agree to 1%".to_string()
    };
    Ok(ExactReport {
        design,
        rows,
        tau_paper_linear: linear,
        kappa_electron_radius: kappa_from_electron_radius(),
        formulas_disagree: disagree,
        note,
    })
}

fn write_exact_csv(r: &ExactReport, out: &mut dyn Write) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "interpretation",
        "v_over_c",
        "one_minus_v_over_c",
        "tau_exact",
        "tau_paper_linear",
        "kappa_electron_radius",
        "kappa_bound",
        "formulas_disagree",
    ])
    .map_err(csv_err)?;
    for row in &r.rows {
        let name = match row.interpretation {
            BInterpretation::Tesla => "tesla",
            BInterpretation::FComponent => "f_component",
        };
        w.write_record([
            name.to_string(),
            fmt_f64(row.v_over_c),
            fmt_f64(row.one_minus_v_over_c),
            fmt_f64(row.tau_exact),
            fmt_f64(r.tau_paper_linear),
            fmt_f64(r.kappa_electron_radius),
            row.kappa_bound.map(fmt_f64).unwrap_or_default(),
            r.formulas_disagree.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateSummary {
    pub status: &'static str,
    pub error: Option<String>,
    #[serde(flatten)]
    pub run: Option<RunSummary>,
}

/// Run a config and write its files; the summary is written even on failure.
pub fn cmd_simulate(config: &Path) -> CliResult<SimulateSummary> {
    let file = ConfigFile::load(config)?;
    let rc = file.to_run_config()?;
    let dir = file.output_dir();
    fs::create_dir_all(&dir)?;
    let ndjson = file.output.formats.contains(&OutputFormat::Ndjson);
    let csv = file.output.formats.contains(&OutputFormat::Csv);

    let mut diag = if ndjson { Some(BufWriter::new(File::create(dir.join(DIAGNOSTICS_FILE))?)) } else { None };
    let mut io_err: Option<CliError> = None;
    let result = run_streaming(&rc, |ev| {
        if io_err.is_some() {
            return;
        }
        let r = match ev {
            RunEvent::Diagnostics(rec) => match &mut diag {
                Some(w) => to_json_line(rec).and_then(|line| {
                    writeln!(w, "{line}")?;
                    // one record per line survives an abnormal exit
                    w.flush()?;
                    Ok(())
                }),
                None => Ok(()),
            },
            RunEvent::Snapshot(s) if csv => write_snapshot(&dir.join(format!("snapshot_{}.csv", s.step)), s),
            RunEvent::Snapshot(_) => Ok(()),
        };
        if let Err(e) = r {
            io_err = Some(e);
        }
    });
    if let Some(w) = &mut diag {
        w.flush()?;
    }
    if let Some(e) = io_err {
        return Err(e);
    }
    let summary = match &result {
        Ok(s) => SimulateSummary { status: "ok", error: None, run: Some(s.clone()) },
        Err(e) => SimulateSummary { status: "failed", error: Some(e.to_string()), run: None },
    };
    fs::write(dir.join(SUMMARY_FILE), to_json_line(&summary)? + "\n")?;
    result?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceOutput {
    pub kind: ModelKind,
    pub kappa: f64,
    #[serde(rename = "B0")]
    pub b0: f64,
    pub t_end: f64,
    #[serde(flatten)]
    pub report: crate::solver::ConvergenceReport,
}

pub fn cmd_convergence(config: &Path, levels: usize) -> CliResult<ConvergenceOutput> {
    if levels < 3 {
        return Err(CliError::Config(format!("convergence needs at least 3 levels, got {levels}")));
    }
    let file = ConfigFile::load(config)?;
    let rc = file.to_run_config()?;
    let ns: Vec<usize> = (0..levels as u32)
        .map(|k| rc.grid.n.checked_mul(1 << k))
        .collect::<Option<_>>()
        .ok_or_else(|| CliError::Config("grid sizes overflow".into()))?;
    let report = convergence_study(&rc, &ns)?;
    Ok(ConvergenceOutput { kind: rc.kind, kappa: rc.kappa, b0: rc.initial.b0, t_end: rc.t_end, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "model": {"kind": "born_infeld", "kappa": 1.0},
        "grid": {"n": 64, "z0": -5, "z1": 5},
        "initial": {"profile": "gaussian", "amplitude": 0.5, "width": 0.5, "B0": 0.75},
        "run": {"t_end": 0.5}
    }"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ConfigFile::parse(MINIMAL).unwrap();
        let rc = c.to_run_config().unwrap();
        assert_eq!(rc.cfl, 0.5);
        assert_eq!(rc.dissipation, 0.0);
        assert_eq!(rc.output_every, 1);
        assert_eq!(c.output.formats, vec![OutputFormat::Ndjson, OutputFormat::Csv]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("\"t_end\": 0.5", "\"t_end\": 0.5, \"tend\": 1");
        assert!(matches!(ConfigFile::parse(&text), Err(CliError::Config(_))));
        let text = MINIMAL.replace("\"B0\": 0.75", "\"B0\": 0.75, \"b0\": 1");
        assert!(ConfigFile::parse(&text).is_err());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for (from, to) in [
            ("\"t_end\": 0.5", "\"t_end\": -1"),
            ("\"n\": 64", "\"n\": 4"),
            ("\"width\": 0.5", "\"width\": 0"),
            ("\"t_end\": 0.5", "\"t_end\": 0.5, \"cfl\": 1.5"),
        ] {
            let c = ConfigFile::parse(&MINIMAL.replace(from, to)).unwrap();
            assert_eq!(c.to_run_config().unwrap_err().exit_code(), EXIT_CONFIG, "{to}");
        }
    }

    #[test]
    fn only_dust_is_evolved() {
        let text = MINIMAL.replace(
            "\"run\"",
            "\"fluid\": {\"eos\": \"ideal_gamma\", \"gamma\": 1.4, \"rho_m0\": 1}, \"run\"",
        );
        let err = ConfigFile::parse(&text).unwrap().to_run_config().unwrap_err();
        assert!(err.to_string().contains("dust"));
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        let line = to_json_line(&serde_json::json!({"a": 0.1, "b": f64::NAN, "c": 3})).unwrap();
        assert_eq!(line, r#"{"a":1.0000000000000001e-1,"b":null,"c":3}"#);
        let back: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn point_report_for_vacuum() {
        let r = cmd_point([0.0; 3], [0.0; 3], KindArg::BornInfeld, 1.0, 1.0).unwrap();
        assert_eq!(r.delta, 1.0);
        assert_eq!((r.x, r.y, r.lagrangian, r.m), (0.0, 0.0, 0.0, 0.0));
        assert!(r.t.iter().flatten().all(|v| *v == 0.0));
        let r = cmd_point([0.0; 3], [1.0, 0.0, 0.0], KindArg::BornInfeld, 1.0, 1.0).unwrap();
        assert_eq!(r.delta, 2.0);
        let r = cmd_point([0.3, -1.0, 2.0], [4.0, 0.1, 0.0], KindArg::Maxwell, 0.0, 2.5).unwrap();
        assert_eq!((r.m, r.n), (0.0, 2.5));
    }

    #[test]
    fn point_beyond_bound_is_runtime_error() {
        let err = cmd_point([2.0, 0.0, 0.0], [0.0; 3], KindArg::BornInfeld, 1.0, 1.0).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_RUNTIME);
        assert!(err.to_string().contains("Born-Infeld bound"));
    }

    #[test]
    fn exact_report_examples() {
        let r = cmd_exact(1.0, 0.0, 1e-22, 1e-12, InterpretationArg::Both).unwrap();
        assert!(r.rows.iter().all(|row| row.v_over_c == 1.0 && row.tau_exact == 0.0 && row.kappa_bound.is_none()));
        assert_eq!(r.tau_paper_linear, 0.0);
        let r = cmd_exact(1.0, 10.0, 1e-22, 1e-12, InterpretationArg::Both).unwrap();
        assert!((r.tau_paper_linear - 5e-22).abs() < 1e-36);
        assert!(r.formulas_disagree);
        assert!((r.kappa_electron_radius - 4.39e-22).abs() < 0.01e-22);
        assert!(cmd_exact(0.0, 1.0, 1e-22, 1e-12, InterpretationArg::Tesla).is_err());
    }
}
