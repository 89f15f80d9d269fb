use std::f64::consts::TAU;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rumkit::doc::{self, Document, FieldDoc, FigureDoc, Space};
use rumkit::error::{FileError, Result};
use rumkit::{csv, io, json, scan, svg};
use rumkit_core::multigrid::{self, MultigridSpec, Tiling};
use rumkit_core::spectra::{self, SpectrumKind, SpectrumSource};
use rumkit_core::symbol::{self, SpectrumScan};
use rumkit_core::{fixtures, localisation, Basis2, CrystalFramework, Vector2};

#[derive(Parser)]
#[command(name = "rumkit", version, about = "Zero-mode spectra of periodic and multigrid frameworks")]
struct Cli {
    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Periodic frameworks.
    #[command(subcommand)]
    Crystal(CrystalCmd),
    /// Multigrid tilings.
    #[command(subcommand)]
    Multigrid(MultigridCmd),
    /// Line spectra of multigrid frameworks.
    #[command(subcommand)]
    Spectra(SpectraCmd),
    /// Draw any document as SVG.
    Render {
        input: PathBuf,
        /// Truncation for reduced figures.
        #[arg(long, default_value_t = 20.0)]
        truncation: f64,
        /// Draw a figure file reduced mod Z^2 instead of as lines.
        #[arg(long)]
        reduced: bool,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum CrystalCmd {
    /// Sample sigma_min of the symbol on an R x R grid of the torus.
    Scan {
        #[command(flatten)]
        src: CrystalSource,
        #[arg(long, default_value_t = 100)]
        resolution: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Detect the straight lines of the spectrum.
    Lines {
        #[command(flatten)]
        src: CrystalSource,
        #[arg(long, default_value_t = 100)]
        resolution: usize,
        #[arg(long, default_value_t = symbol::DEFAULT_DENOMINATOR_BOUND)]
        denominator_bound: i64,
        #[command(flatten)]
        out: Output,
    },
    /// Extract a flex localised along one spectral line.
    Localise {
        #[command(flatten)]
        src: CrystalSource,
        #[arg(long, default_value_t = 60)]
        resolution: usize,
        #[arg(long, default_value_t = symbol::DEFAULT_DENOMINATOR_BOUND)]
        denominator_bound: i64,
        /// Index of the line, in the order `crystal lines` prints them.
        #[arg(long, default_value_t = 0)]
        line: usize,
        #[arg(long, default_value_t = 16)]
        m_max: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Phase-periodic flex at a wave vector, on a window of cells.
    Ifm {
        #[command(flatten)]
        src: CrystalSource,
        /// Wave vector `g1,g2` in [0,1)^2.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        gamma: [f64; 2],
        /// Cells `-w..=w` in both directions.
        #[arg(long, default_value_t = 2)]
        window: i64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum MultigridCmd {
    /// Dualise a multigrid into a parallelogram tiling.
    Generate {
        #[command(flatten)]
        src: GridSource,
        #[command(flatten)]
        out: Output,
    },
    /// Ribbons and their directions.
    Ribbons {
        #[command(flatten)]
        src: GridSource,
        #[command(flatten)]
        out: Output,
    },
    /// Shear, slippage and modulated ribbon flexes.
    Flex {
        #[command(flatten)]
        src: GridSource,
        #[arg(long, value_enum)]
        kind: FlexKind,
        #[arg(long, default_value_t = 0)]
        family: usize,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        index: i64,
        /// Second ribbon for `pair`.
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        index2: i64,
        /// Band width for `modulated`.
        #[arg(long, default_value_t = 8)]
        n: i64,
        /// `lambda = exp(2 pi i phase)` for `modulated`.
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        phase: f64,
        /// Slip vector; defaults to the unit vector perpendicular to the
        /// family's edge.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        b: Option<[f64; 2]>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FlexKind {
    Shear,
    Pair,
    Modulated,
}

#[derive(Subcommand)]
enum SpectraCmd {
    /// Slippage spectrum (reciprocal ribbon figure).
    Slippage {
        #[command(flatten)]
        src: GridSource,
        #[command(flatten)]
        fig: FigureArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Limit spectrum; for multigrid frameworks it equals the slippage spectrum.
    Limit {
        #[command(flatten)]
        src: GridSource,
        #[command(flatten)]
        fig: FigureArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Distance between two figures clipped to `[-N, N]^2`.
    Compare {
        first: PathBuf,
        second: PathBuf,
        /// Half-width N of the clipping square.
        #[arg(long, default_value_t = 1.0)]
        window: f64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct CrystalSource {
    /// Crystal JSON file.
    #[arg(conflicts_with = "fixture")]
    input: Option<PathBuf>,
    /// Built-in crystal instead of a file.
    #[arg(long)]
    fixture: Option<String>,
    /// Zero tolerance for sigma_min; defaults to 1e-8 times the squared
    /// longest bar.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct GridSource {
    /// Tiling JSON file.
    #[arg(conflicts_with = "preset")]
    input: Option<PathBuf>,
    /// penrose, ammann-beenker, rhombille or square.
    #[arg(long)]
    preset: Option<String>,
    /// Window radius for presets.
    #[arg(long, default_value_t = 20.0)]
    window: f64,
    /// Replace the normals by their rational approximant with denominator q.
    #[arg(long)]
    approximant: Option<i64>,
}

#[derive(Args)]
struct FigureArgs {
    /// Reference basis `a1x,a1y,a2x,a2y`.
    #[arg(long, value_parser = parse_basis, allow_hyphen_values = true)]
    basis: Option<Basis2>,
    /// Length T of the line pieces reduced mod Z^2 (SVG output).
    #[arg(long, default_value_t = 20.0)]
    truncation: f64,
}

#[derive(Args)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
    Json,
}

fn parse_floats(s: &str, n: usize) -> std::result::Result<Vec<f64>, String> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers"));
    }
    Ok(v)
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let v = parse_floats(s, 2)?;
    Ok([v[0], v[1]])
}

fn parse_basis(s: &str) -> std::result::Result<Basis2, String> {
    let v = parse_floats(s, 4)?;
    Basis2::new(Vector2::new(v[0], v[1]), Vector2::new(v[2], v[3])).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(FileError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rumkit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

struct Ctx {
    quiet: bool,
}

impl Ctx {
    fn note(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx { quiet: cli.quiet };
    match cli.command {
        Command::Crystal(c) => crystal(&ctx, c),
        Command::Multigrid(m) => multigrid_cmd(&ctx, m),
        Command::Spectra(s) => spectra_cmd(&ctx, s),
        Command::Render {
            input,
            truncation,
            reduced,
            out,
        } => render(&input, truncation, reduced, &out),
    }
}

fn format_of(out: &Output, default: Format, allowed: &[Format]) -> Result<Format> {
    let f = out.format.unwrap_or(default);
    if !allowed.contains(&f) {
        return Err(FileError::Usage("output format not available for this command".into()));
    }
    Ok(f)
}

fn emit(out: &Output, text: &str) -> Result<()> {
    match &out.out {
        Some(p) => io::write_atomic(p, text.as_bytes()),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_json(out: &Output, v: &Value) -> Result<()> {
    emit(out, &json::to_canonical_string(v)?)
}

fn load_crystal(src: &CrystalSource) -> Result<(CrystalFramework, String, f64)> {
    let (c, name) = match (&src.input, &src.fixture) {
        (Some(p), None) => (doc::crystal_from_json(&io::read_json(p)?)?, p.display().to_string()),
        (None, Some(f)) => (
            fixtures::by_name(f).ok_or_else(|| {
                FileError::Usage(format!("unknown fixture {f:?}; known: {}", fixtures::NAMES.join(", ")))
            })?,
            format!("fixture:{f}"),
        ),
        _ => return Err(FileError::Usage("give a crystal file or --fixture".into())),
    };
    let tol = match src.tol {
        Some(t) if !(t >= 0.0) || !t.is_finite() => {
            return Err(FileError::Usage("--tol must be a finite non-negative number".into()))
        }
        Some(t) => t,
        None => symbol::default_tol(&c),
    };
    Ok((c, name, tol))
}

fn load_tiling(ctx: &Ctx, src: &GridSource) -> Result<(Tiling, String)> {
    let (t, name) = match (&src.input, &src.preset) {
        (Some(p), None) => {
            let t = doc::tiling_from_json(&io::read_json(p)?)?;
            (t, p.display().to_string())
        }
        (None, Some(name)) => {
            let spec = MultigridSpec::preset(name, src.window)
                .ok_or_else(|| FileError::Usage(format!("unknown preset {name:?}")))??;
            (multigrid::dualize(&spec)?, format!("preset:{name}"))
        }
        _ => return Err(FileError::Usage("give a tiling file or --preset".into())),
    };
    match src.approximant {
        None => Ok((t, name)),
        Some(q) => {
            let (spec, devs) = multigrid::rational_approximant(&t.spec, q)?;
            let worst = devs.iter().cloned().fold(0.0, f64::max);
            ctx.note(&format!("approximant q = {q}: largest normal deviation {worst:.3e} rad"));
            Ok((multigrid::dualize(&spec)?, format!("{name} approximant q={q}")))
        }
    }
}

fn run_scan(ctx: &Ctx, c: &CrystalFramework, resolution: usize, tol: f64) -> Result<SpectrumScan> {
    let threads = scan::thread_cap()?;
    let quiet = ctx.quiet;
    let step = (resolution / 10).max(1);
    scan::scan_parallel(c, resolution, tol, threads, &move |done, total| {
        if !quiet && (done % step == 0 || done == total) {
            eprintln!("scan: {done}/{total} rows");
        }
    })
}

fn crystal(ctx: &Ctx, cmd: CrystalCmd) -> Result<()> {
    match cmd {
        CrystalCmd::Scan { src, resolution, out } => {
            let (c, _, tol) = load_crystal(&src)?;
            let format = format_of(&out, Format::Csv, &[Format::Csv, Format::Svg, Format::Json])?;
            let s = run_scan(ctx, &c, resolution, tol)?;
            ctx.note(&format!(
                "{} of {} samples below tol = {tol:e}",
                s.below_tol().len(),
                s.samples.len()
            ));
            match format {
                Format::Csv => emit(&out, &csv::scan_csv(&s)),
                Format::Svg => emit(&out, &svg::scan_svg(&s)),
                Format::Json => emit_json(&out, &doc::scan_to_json(&s)),
            }
        }
        CrystalCmd::Lines {
            src,
            resolution,
            denominator_bound,
            out,
        } => {
            let (c, name, tol) = load_crystal(&src)?;
            let format = format_of(&out, Format::Json, &[Format::Csv, Format::Svg, Format::Json])?;
            let s = run_scan(ctx, &c, resolution, tol)?;
            let set = symbol::detect_spectral_lines(&c, &s, denominator_bound)?;
            ctx.note(&format!("{} lines", set.lines.len()));
            match format {
                Format::Csv => emit(&out, &csv::lines_csv(&set)),
                Format::Svg => emit(&out, &svg::figure_svg(&set.figure, &format!("spectral lines of {name}"))),
                Format::Json => {
                    let lines: Vec<Value> = set
                        .lines
                        .iter()
                        .map(|l| {
                            json!({
                                "direction": l.direction,
                                "offset": json::float(l.offset),
                                "angle_rad": json::float(l.line().angle()),
                            })
                        })
                        .collect();
                    let mut v = doc::figure_to_json(&FigureDoc {
                        kind: "rum".into(),
                        space: Space::Reciprocal,
                        figure: set.figure.clone(),
                    });
                    v["spectral_lines"] = Value::Array(lines);
                    v["rum_dimension"] = json!(set.rum_dimension);
                    emit_json(&out, &v)
                }
            }
        }
        CrystalCmd::Localise {
            src,
            resolution,
            denominator_bound,
            line,
            m_max,
            out,
        } => {
            let (c, name, tol) = load_crystal(&src)?;
            format_of(&out, Format::Json, &[Format::Json])?;
            let s = run_scan(ctx, &c, resolution, tol)?;
            let set = symbol::detect_spectral_lines(&c, &s, denominator_bound)?;
            let l = set.lines.get(line).ok_or_else(|| {
                FileError::Usage(format!("line {line} requested, {} detected", set.lines.len()))
            })?;
            let loc = localisation::localise_line(&c, l, m_max, tol)?;
            let range = loc.band.check_window();
            let (_, field) = loc.band.realize(range)?;
            let z = loc.z.to_f64();
            ctx.note(&format!(
                "line {:?} offset {:.6}: band height m = {}, residual {:.2e}",
                l.direction, l.offset, loc.band.m, loc.band.residual
            ));
            let framework_ref = format!(
                "{name}; basis change Z = [[{}, {}], [{}, {}]]; cells k1 in [{}, {}), k2 in [{}, {}); band height {}",
                z[0][0], z[0][1], z[1][0], z[1][1], range.lo[0], range.hi[0], range.lo[1], range.hi[1], loc.band.m
            );
            emit_json(&out, &doc::field_to_json(&FieldDoc { framework_ref, field }))
        }
        CrystalCmd::Ifm { src, gamma, window, out } => {
            let (c, name, tol) = load_crystal(&src)?;
            format_of(&out, Format::Json, &[Format::Json])?;
            if window < 0 {
                return Err(FileError::Usage("--window must be non-negative".into()));
            }
            let ifm = symbol::extract_ifm(&c, gamma, rumkit_core::framework::KRange::centered(window), tol)?;
            let framework_ref = format!("{name}; cells k1, k2 in [{}, {}]", -window, window);
            emit_json(
                &out,
                &doc::field_to_json(&FieldDoc {
                    framework_ref,
                    field: ifm.field,
                }),
            )
        }
    }
}

fn multigrid_cmd(ctx: &Ctx, cmd: MultigridCmd) -> Result<()> {
    match cmd {
        MultigridCmd::Generate { src, out } => {
            let format = format_of(&out, Format::Json, &[Format::Json, Format::Svg])?;
            let (t, _) = load_tiling(ctx, &src)?;
            let reg = multigrid::check_regularity(&t.spec);
            if !reg.is_regular() {
                ctx.note(&format!("warning: {} near-triple intersections", reg.flagged_count));
            }
            ctx.note(&format!("{} vertices, {} tiles", t.vertices.len(), t.tiles.len()));
            match format {
                Format::Svg => emit(&out, &svg::tiling_svg(&t)),
                _ => emit_json(&out, &doc::tiling_to_json(&t)),
            }
        }
        MultigridCmd::Ribbons { src, out } => {
            let format = format_of(&out, Format::Csv, &[Format::Csv, Format::Json, Format::Svg])?;
            let (t, name) = load_tiling(ctx, &src)?;
            let rf = multigrid::ribbon_figure(&t)?;
            let all: Vec<_> = t
                .ribbon_index()
                .into_keys()
                .filter_map(|(j, k)| multigrid::extract_ribbon(&t, j, k).ok())
                .collect();
            ctx.note(&format!("direction spread {:.2e} rad", rf.spread));
            match format {
                Format::Csv => emit(&out, &csv::ribbons_csv(&all)),
                Format::Svg => emit(&out, &svg::figure_svg(&rf.figure, &format!("ribbon figure of {name}"))),
                Format::Json => emit_json(
                    &out,
                    &doc::figure_to_json(&FigureDoc {
                        kind: "ribbon".into(),
                        space: Space::Ambient,
                        figure: rf.figure,
                    }),
                ),
            }
        }
        MultigridCmd::Flex {
            src,
            kind,
            family,
            index,
            index2,
            n,
            phase,
            b,
            out,
        } => {
            format_of(&out, Format::Json, &[Format::Json])?;
            let (t, name) = load_tiling(ctx, &src)?;
            if family >= t.spec.r() {
                return Err(FileError::Usage(format!("family {family} out of range")));
            }
            let b = match b {
                Some([x, y]) => Vector2::new(x, y),
                None => t.spec.families()[family].edge.rotate90().normalized().expect("nonzero edge"),
            };
            let (field, what) = match kind {
                FlexKind::Shear => (multigrid::shear_flex(&t, family, index, b)?, format!("shear of ribbon {index}")),
                FlexKind::Pair => (
                    multigrid::pair_slippage_flex(&t, family, index, index2, b)?,
                    format!("slippage between ribbons {index} and {index2}"),
                ),
                FlexKind::Modulated => {
                    let lambda = rumkit_core::math::cis(TAU * phase);
                    (
                        multigrid::modulated_ribbon_flex(&t, family, n, lambda, b)?,
                        format!("modulated flex N = {n}, phase {phase}"),
                    )
                }
            };
            let fw = multigrid::framework_of(&t)?;
            ctx.note(&format!("flex residual {:.2e}", fw.flex_residual_max(&field)?));
            let framework_ref = format!("{name}; family {family}; {what}");
            emit_json(&out, &doc::field_to_json(&FieldDoc { framework_ref, field }))
        }
    }
}

fn spectra_cmd(ctx: &Ctx, cmd: SpectraCmd) -> Result<()> {
    match cmd {
        SpectraCmd::Slippage { src, fig, out } => spectrum(ctx, SpectrumKind::Slippage, &src, &fig, &out),
        SpectraCmd::Limit { src, fig, out } => spectrum(ctx, SpectrumKind::Limit, &src, &fig, &out),
        SpectraCmd::Compare {
            first,
            second,
            window,
            out,
        } => {
            format_of(&out, Format::Json, &[Format::Json])?;
            let a = doc::figure_from_json(&io::read_json(&first)?)?;
            let b = doc::figure_from_json(&io::read_json(&second)?)?;
            if a.space != b.space {
                ctx.note("warning: comparing figures from different spaces");
            }
            let d = spectra::figure_distance_clipped(&a.figure, &b.figure, window)?;
            emit_json(
                &out,
                &json!({
                    "version": doc::VERSION,
                    "distance": json::float(d),
                    "window": json::float(window),
                    "lines": [a.figure.len(), b.figure.len()],
                }),
            )
        }
    }
}

fn spectrum(ctx: &Ctx, kind: SpectrumKind, src: &GridSource, fig: &FigureArgs, out: &Output) -> Result<()> {
    let format = format_of(out, Format::Csv, &[Format::Csv, Format::Svg, Format::Json])?;
    let (t, _) = load_tiling(ctx, src)?;
    let basis = fig.basis.unwrap_or_else(Basis2::standard);
    let f = match kind {
        SpectrumKind::Slippage => spectra::slippage_spectrum(SpectrumSource::Tiling(&t), &basis)?,
        SpectrumKind::Limit => spectra::limit_spectrum_multigrid(SpectrumSource::Tiling(&t), &basis)?,
    };
    let label = match kind {
        SpectrumKind::Slippage => "slippage",
        SpectrumKind::Limit => "limit",
    };
    ctx.note(&format!(
        "{} lines; reduced figure is {}",
        f.figure.len(),
        if f.is_dense() { "dense" } else { "finite" }
    ));
    let d = FigureDoc {
        kind: label.into(),
        space: Space::Reciprocal,
        figure: f.figure.clone(),
    };
    match format {
        Format::Csv => emit(out, &csv::figure_csv(&d)),
        Format::Svg => {
            if !(fig.truncation > 0.0) {
                return Err(FileError::Usage("--truncation must be positive".into()));
            }
            emit(out, &svg::reduced_svg(&f.reduced(fig.truncation), fig.truncation))
        }
        Format::Json => {
            let mut v = doc::figure_to_json(&d);
            v["dense"] = json!(f.is_dense());
            emit_json(out, &v)
        }
    }
}

fn render(input: &Path, truncation: f64, reduced: bool, out: &Output) -> Result<()> {
    format_of(out, Format::Svg, &[Format::Svg])?;
    let text = match doc::document_from_json(&io::read_json(input)?)? {
        Document::Tiling(t) => svg::tiling_svg(&t),
        Document::Scan(s) => svg::scan_svg(&s),
        Document::Figure(f) if reduced => {
            if !(truncation > 0.0) {
                return Err(FileError::Usage("--truncation must be positive".into()));
            }
            let segs: Vec<_> = f
                .figure
                .lines()
                .iter()
                .map(|l| rumkit_core::geometry::reduce_line_segments(l, truncation))
                .collect();
            svg::reduced_svg(&segs, truncation)
        }
        Document::Figure(f) => svg::figure_svg(&f.figure, &f.kind),
        Document::Crystal(c) => {
            let r = c.realize_window(rumkit_core::framework::KRange::centered(2))?;
            svg::framework_svg(&r.framework)
        }
        Document::Field(_) => {
            return Err(FileError::Usage("field files carry no geometry to draw".into()));
        }
    };
    emit(out, &text)
}
