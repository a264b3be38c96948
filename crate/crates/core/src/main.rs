use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use irs_core::coverage::{
    angle_sweep_replica, coverage_map, load_scene, replica_argmax, replica_csv, ReplicaSetup,
    DEFAULT_PANEL_HEIGHT,
};
use irs_core::far_field::{
    build_profile, efficiency_csv, efficiency_vs_pec, peak_angle, peak_directivity,
    scattered_pattern, AngleGrid,
};
use irs_core::gradient::{
    anomalous_angle, design_supercell, parallel_wavevector_ratio, period_for_angle,
    table2_reference_spec, SupercellSpec,
};
use irs_core::mask::{export_svg, layout_panel, PatchShape};
use irs_core::unit_cell::{
    default_surrogate_curve, load_phase_table, CellResponse, LayerStack, PhaseCurve,
    SurrogateCell, UniformResponse, DEFAULT_TRANSVERSE_PITCH,
};
use irs_core::{Angle, Error, Frequency, Polarization};

/// Phase-gradient reflecting surface toolkit.
///
/// Units at this interface: frequencies in GHz, lengths in mm (scene files in
/// metres), angles in degrees, powers in dBm, gains in dBi.
#[derive(Debug, Parser)]
#[command(name = "irs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a supercell (or emit the published reference design).
    Design(DesignArgs),
    /// Far-field pattern of a tiled design; CSV theta_deg, magnitude_db, phase_deg.
    Pattern(PatternArgs),
    /// Reflection efficiency against an equal-aperture metal plate versus frequency.
    Sweep(SweepArgs),
    /// Received power versus Rx angle and frequency in the chamber geometry.
    Replica(ReplicaArgs),
    /// Coverage heatmap of an indoor scene (JSON, metres).
    Coverage(CoverageArgs),
    /// Printable SVG mask of a tiled design (millimetre units).
    Mask(MaskArgs),
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// Phase table (D_mm, gamma_abs, gamma_phase_deg) replacing the analytical unit-cell model.
    #[arg(long, value_name = "PATH")]
    phase_table: Option<PathBuf>,
    /// Use a loss-free substrate in the analytical unit-cell model.
    #[arg(long)]
    lossless: bool,
}

impl SourceArgs {
    fn stack(&self) -> LayerStack {
        let stack = LayerStack::paper_on_mdf();
        if self.lossless {
            stack.lossless()
        } else {
            stack
        }
    }

    fn curve(&self, pitch: f64, f: Frequency) -> irs_core::Result<PhaseCurve> {
        match &self.phase_table {
            Some(path) => load_phase_table(path, f),
            None => default_surrogate_curve(&self.stack(), pitch, f),
        }
    }

    fn inputs(&self) -> Vec<&Path> {
        self.phase_table.iter().map(PathBuf::as_path).collect()
    }
}

#[derive(Debug, Args)]
struct DesignInput {
    /// Design-export JSON; without it the 5 GHz, 30 deg, 10-cell design is synthesized.
    #[arg(long, value_name = "PATH", conflicts_with = "paper_table2")]
    design: Option<PathBuf>,
    /// Use the published reference design (120 mm period, D1..D5 = 16.4..21.3 mm).
    #[arg(long)]
    paper_table2: bool,
}

#[derive(Debug, Args)]
struct DesignArgs {
    /// Design frequency in GHz.
    #[arg(long, default_value_t = 5.0)]
    freq_ghz: f64,
    /// Steering angle for normal incidence, degrees.
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    angle_deg: f64,
    /// Unit cells per supercell.
    #[arg(long, default_value_t = 10)]
    cells: usize,
    /// Emit the published reference design instead of synthesizing one.
    #[arg(long)]
    paper_table2: bool,
    #[command(flatten)]
    source: SourceArgs,
    /// Write the design JSON here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PatternArgs {
    #[command(flatten)]
    input: DesignInput,
    #[command(flatten)]
    source: SourceArgs,
    /// Incidence angle in degrees (mirror side: a metal plate peaks here).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta_i_deg: f64,
    /// Supercell periods along the gradient axis.
    #[arg(long, default_value_t = 10)]
    tiles: usize,
    /// Angle grid step in degrees over [-90, 90].
    #[arg(long, default_value_t = 0.1)]
    step_deg: f64,
    /// Replace the design with a uniform metal plate of equal aperture.
    #[arg(long)]
    uniform: bool,
    /// Write the pattern CSV here (summary goes to stdout); otherwise CSV to stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    input: DesignInput,
    #[command(flatten)]
    source: SourceArgs,
    /// Incidence angle in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta_i_deg: f64,
    #[arg(long, default_value_t = 10)]
    tiles: usize,
    /// Sweep start, GHz.
    #[arg(long, default_value_t = 4.5)]
    f_start_ghz: f64,
    /// Sweep stop, GHz.
    #[arg(long, default_value_t = 5.5)]
    f_stop_ghz: f64,
    #[arg(long, default_value_t = 21)]
    points: usize,
    /// Efficiency CSV (freq_ghz, ratio, ratio_db); stdout if absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReplicaArgs {
    #[command(flatten)]
    input: DesignInput,
    #[command(flatten)]
    source: SourceArgs,
    /// Re-evaluate the analytical unit cell at each frequency instead of using
    /// the design-frequency curve.
    #[arg(long, conflicts_with = "phase_table")]
    dispersive: bool,
    /// Frequency band START:STOP in GHz.
    #[arg(long, default_value = "5.16:5.20")]
    band: String,
    /// Frequencies across the band.
    #[arg(long, default_value_t = 5)]
    points: usize,
    /// Tx and Rx distance from the panel, metres.
    #[arg(long, default_value_t = 1.5)]
    s: f64,
    /// Transmit power, dBm.
    #[arg(long, default_value_t = 14.0, allow_negative_numbers = true)]
    pt_dbm: f64,
    /// Tx antenna gain, dBi.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gt_dbi: f64,
    /// Rx antenna gain, dBi.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gr_dbi: f64,
    /// Incidence angle in degrees (Tx placed on the opposite side of the normal).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta_i_deg: f64,
    /// Rx angles START:STOP:STEP in degrees.
    #[arg(long, default_value = "-80:80:1", allow_hyphen_values = true)]
    angles: String,
    /// Supercell periods along the gradient axis.
    #[arg(long, default_value_t = 3)]
    tiles: usize,
    /// Panel transverse height in mm.
    #[arg(long, default_value_t = DEFAULT_PANEL_HEIGHT * 1e3)]
    height_mm: f64,
    /// Replace the design with a copper plate of equal aperture.
    #[arg(long)]
    reference: bool,
    /// Sweep CSV (freq_ghz, rx_angle_deg, power_dbm); stdout if absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CoverageArgs {
    /// Scene JSON (metres); panel design paths resolve relative to it.
    scene: PathBuf,
    /// Heatmap CSV (x_m, y_m, power_dbm|NOCOV); stdout if absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MaskArgs {
    #[command(flatten)]
    input: DesignInput,
    #[command(flatten)]
    source: SourceArgs,
    /// Rows along the transverse axis.
    #[arg(long, default_value_t = 12)]
    rows: usize,
    /// Supercell periods along the gradient axis.
    #[arg(long, default_value_t = 2)]
    periods: usize,
    /// Transverse cell pitch in mm.
    #[arg(long, default_value_t = DEFAULT_TRANSVERSE_PITCH * 1e3)]
    transverse_pitch_mm: f64,
    /// Draw D_n along the transverse axis with this fixed gradient-axis width
    /// in mm (defaults to 11 mm for the published design, square otherwise).
    #[arg(long, value_name = "MM")]
    strip_mm: Option<f64>,
    /// Output SVG path.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

fn check_inputs(paths: &[&Path]) -> irs_core::Result<()> {
    for p in paths {
        if !p.is_file() {
            return Err(Error::InvalidInput(format!("input file not found: {}", p.display())));
        }
    }
    Ok(())
}

fn check_output(path: Option<&Path>) -> irs_core::Result<()> {
    if let Some(p) = path {
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(Error::InvalidInput(format!(
                "output directory does not exist: {}",
                parent.display()
            )));
        }
    }
    Ok(())
}

fn emit(text: &str, out: Option<&Path>) -> irs_core::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_range(text: &str, parts: usize, what: &str) -> irs_core::Result<Vec<f64>> {
    let values: Result<Vec<f64>, _> = text.split(':').map(|s| s.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if v.len() == parts => Ok(v),
        _ => Err(Error::InvalidInput(format!("cannot parse {what} '{text}'"))),
    }
}

fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![start];
    }
    (0..points).map(|i| start + (stop - start) * i as f64 / (points - 1) as f64).collect()
}

fn frequencies_ghz(start: f64, stop: f64, points: usize) -> irs_core::Result<Vec<Frequency>> {
    if points == 0 || stop < start {
        return Err(Error::InvalidInput("frequency range is empty".into()));
    }
    linspace(start, stop, points).into_iter().map(Frequency::from_ghz).collect()
}

/// The 5 GHz, 30 degree, 10-cell design on the given phase source.
fn default_design(source: &SourceArgs) -> irs_core::Result<SupercellSpec> {
    let f = Frequency::from_ghz(5.0)?;
    let theta = Angle::from_degrees(30.0);
    let pitch = period_for_angle(f, theta)? / 10.0;
    design_supercell(f, theta, 10, &source.curve(pitch, f)?)
}

fn resolve_design(input: &DesignInput, source: &SourceArgs) -> irs_core::Result<SupercellSpec> {
    if input.paper_table2 {
        Ok(table2_reference_spec())
    } else if let Some(path) = &input.design {
        SupercellSpec::load(path)
    } else {
        default_design(source)
    }
}

fn design_inputs<'a>(input: &'a DesignInput, source: &'a SourceArgs) -> Vec<&'a Path> {
    let mut v = source.inputs();
    v.extend(input.design.as_deref());
    v
}

fn cmd_design(args: &DesignArgs) -> irs_core::Result<()> {
    check_inputs(&args.source.inputs())?;
    check_output(args.out.as_deref())?;
    let spec = if args.paper_table2 {
        table2_reference_spec()
    } else {
        let f = Frequency::from_ghz(args.freq_ghz)?;
        let theta = Angle::from_degrees(args.angle_deg);
        let period = period_for_angle(f, theta)?;
        if args.cells < 2 {
            return Err(Error::InvalidInput(format!(
                "a phase gradient needs at least two cells, got {}",
                args.cells
            )));
        }
        let curve = args.source.curve(period / args.cells as f64, f)?;
        design_supercell(f, theta, args.cells, &curve)?
    };
    let f = spec.frequency();
    let ratio = parallel_wavevector_ratio(spec.period(), f)?;
    let summary = format!(
        "P = {:.2} mm\nrho/k0 = {:.4}\ntheta_r = {}\n",
        spec.period() * 1e3,
        ratio,
        match anomalous_angle(Angle::ZERO, spec.period(), f) {
            Ok(a) => format!("{:.2} deg", a.degrees()),
            Err(_) => "evanescent".to_string(),
        }
    );
    let json = spec.to_json()? + "\n";
    match &args.out {
        Some(path) => {
            print!("{summary}");
            std::fs::write(path, json)?;
        }
        None => {
            eprint!("{summary}");
            print!("{json}");
        }
    }
    Ok(())
}

fn cmd_pattern(args: &PatternArgs) -> irs_core::Result<()> {
    check_inputs(&design_inputs(&args.input, &args.source))?;
    check_output(args.out.as_deref())?;
    let spec = resolve_design(&args.input, &args.source)?;
    let grid = AngleGrid::degrees(args.step_deg)?;
    let theta_i = Angle::from_degrees(args.theta_i_deg);
    let f = spec.frequency();
    let profile = if args.uniform {
        build_profile(&spec, &UniformResponse::pec(), args.tiles)?
    } else {
        build_profile(&spec, &args.source.curve(spec.pitch(), f)?, args.tiles)?
    };
    let pattern = scattered_pattern(&profile, theta_i, f, &grid);
    let directivity = peak_directivity(&pattern)?;
    let summary = format!(
        "peak_deg={:.2}, directivity_db={:.3}\n",
        peak_angle(&pattern).degrees(),
        directivity.db
    );
    match &args.out {
        Some(path) => {
            std::fs::write(path, pattern.to_csv())?;
            print!("{summary}");
        }
        None => {
            print!("{}", pattern.to_csv());
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> irs_core::Result<()> {
    check_inputs(&design_inputs(&args.input, &args.source))?;
    check_output(args.out.as_deref())?;
    let spec = resolve_design(&args.input, &args.source)?;
    let freqs = frequencies_ghz(args.f_start_ghz, args.f_stop_ghz, args.points)?;
    let source: Box<dyn CellResponse> = match &args.source.phase_table {
        Some(path) => Box::new(load_phase_table(path, spec.frequency())?),
        None => Box::new(SurrogateCell {
            stack: args.source.stack(),
            pitch_x: spec.pitch(),
            pitch_y: DEFAULT_TRANSVERSE_PITCH.max(1.5 * spec.pitch()),
            polarization: Polarization::Tm,
        }),
    };
    let ratios = efficiency_vs_pec(
        &spec,
        source.as_ref(),
        Angle::from_degrees(args.theta_i_deg),
        &freqs,
        args.tiles,
    )?;
    emit(&efficiency_csv(&freqs, &ratios), args.out.as_deref())
}

fn cmd_replica(args: &ReplicaArgs) -> irs_core::Result<()> {
    check_inputs(&design_inputs(&args.input, &args.source))?;
    check_output(args.out.as_deref())?;
    let band = parse_range(&args.band, 2, "band")?;
    let freqs = frequencies_ghz(band[0], band[1], args.points)?;
    let angles = parse_range(&args.angles, 3, "angles")?;
    if !(angles[2] > 0.0) || angles[1] < angles[0] {
        return Err(Error::InvalidInput(format!("bad angle range '{}'", args.angles)));
    }
    let count = ((angles[1] - angles[0]) / angles[2] + 1e-9).floor() as usize + 1;
    let rx_angles: Vec<Angle> =
        (0..count).map(|i| Angle::from_degrees(angles[0] + i as f64 * angles[2])).collect();
    let spec = resolve_design(&args.input, &args.source)?;
    let source: Box<dyn CellResponse> = if args.reference {
        Box::new(UniformResponse::pec())
    } else if args.dispersive {
        Box::new(SurrogateCell {
            stack: args.source.stack(),
            pitch_x: spec.pitch(),
            pitch_y: DEFAULT_TRANSVERSE_PITCH.max(1.5 * spec.pitch()),
            polarization: Polarization::Tm,
        })
    } else {
        Box::new(args.source.curve(spec.pitch(), spec.frequency())?)
    };
    let setup = ReplicaSetup {
        distance: args.s,
        tx_power_dbm: args.pt_dbm,
        tx_gain_dbi: args.gt_dbi,
        rx_gain_dbi: args.gr_dbi,
        theta_i: Angle::from_degrees(args.theta_i_deg),
        panel_height: args.height_mm * 1e-3,
    };
    let rows = angle_sweep_replica(&spec, source.as_ref(), args.tiles, &setup, &freqs, &rx_angles)?;
    emit(&replica_csv(&rows), args.out.as_deref())?;
    for (f, a) in replica_argmax(&rows) {
        eprintln!("freq_ghz={:.4}, argmax_deg={:.1}", f.ghz(), a.degrees());
    }
    Ok(())
}

fn cmd_coverage(args: &CoverageArgs) -> irs_core::Result<()> {
    check_inputs(&[args.scene.as_path()])?;
    check_output(args.out.as_deref())?;
    let scene = load_scene(&args.scene)?;
    let map = coverage_map(&scene)?;
    emit(&map.to_csv(), args.out.as_deref())
}

fn cmd_mask(args: &MaskArgs) -> irs_core::Result<()> {
    check_inputs(&design_inputs(&args.input, &args.source))?;
    check_output(Some(&args.out))?;
    let spec = resolve_design(&args.input, &args.source)?;
    let shape = match (args.strip_mm, args.input.paper_table2) {
        (Some(mm), _) => PatchShape::TransverseStrip { gradient_extent: mm * 1e-3 },
        (None, true) => PatchShape::TransverseStrip { gradient_extent: 11e-3 },
        (None, false) => PatchShape::Square,
    };
    let layout =
        layout_panel(&spec, args.rows, args.periods, args.transverse_pitch_mm * 1e-3, shape)?;
    export_svg(&layout, &args.out)?;
    let (w, h) = layout.sheet_size();
    println!(
        "sheet = {:.2} mm x {:.2} mm, patches = {}",
        w * 1e3,
        h * 1e3,
        layout.patches().len()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Design(a) => cmd_design(a),
        Command::Pattern(a) => cmd_pattern(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Replica(a) => cmd_replica(a),
        Command::Coverage(a) => cmd_coverage(a),
        Command::Mask(a) => cmd_mask(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
