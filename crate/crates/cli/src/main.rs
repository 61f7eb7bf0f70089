use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mortex::bench::examples::ExampleName;
use mortex::bench::inclusion::EshelbyConfig;
use mortex::bench::patch::{HostMesh, PatchCase, PatchLoad, PatchTestConfig};
use mortex::model::{DualScheme, Kappa};
use mortex_cli::{
    dump_cuts, output_dir, print_report, read_config, run_benchmark, run_config, Benchmark, CliResult,
};

/// Mortar tying of patch meshes embedded in host meshes.
#[derive(Parser)]
#[command(name = "mortex", version, about)]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG takes precedence.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Output directory. Defaults to $MORTEX_OUT, then the configuration's
    /// output.dir, then ./mortex-out.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Scheme {
    /// Multiplier scheme: sli-p0, sli-p1 or cgi.
    #[arg(long, value_name = "SCHEME")]
    dual: Option<DualScheme>,
    /// Coarse-graining parameter: a positive integer, auto (rounded mesh
    /// contrast) or local (per super-segment).
    #[arg(long, value_name = "KAPPA")]
    kappa: Option<Kappa>,
    /// Split blending quadrilaterals into triangles.
    #[arg(long)]
    triangulate: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a model or benchmark configuration file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        scheme: Scheme,
        /// Also write the cut geometry of every host domain.
        #[arg(long)]
        dump_cuts: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Compression or bending patch test.
    PatchTest {
        /// 1: patch finer than the host, 2: patch coarser than the host.
        #[arg(long, default_value = "1")]
        case: PatchCase,
        /// compression or bending.
        #[arg(long, default_value = "compression")]
        load: PatchLoad,
        /// Host mesh: triangles, aligned or distorted.
        #[arg(long, default_value = "distorted")]
        host: HostMesh,
        /// Patch over host Young's modulus.
        #[arg(long, default_value_t = 1000.0)]
        contrast: f64,
        /// Seed of the host distortion.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        scheme: Scheme,
        #[command(flatten)]
        output: Output,
    },
    /// Circular inclusion under remote tension, compared with the analytic field.
    Eshelby {
        /// Mortar edges on the inclusion boundary.
        #[arg(long, default_value_t = 128)]
        nm: usize,
        /// Targeted mortar segments per blending host element.
        #[arg(long, default_value_t = 6.0)]
        mc: f64,
        /// Inclusion over matrix Young's modulus.
        #[arg(long, default_value_t = 1000.0)]
        contrast: f64,
        #[command(flatten)]
        scheme: Scheme,
        #[command(flatten)]
        output: Output,
    },
    /// Inclusion error against interface resolution, or against kappa with --kappas.
    Convergence {
        /// Interface resolutions of the convergence study.
        #[arg(long, value_delimiter = ',', default_value = "128,256,512,1024,2048")]
        nms: Vec<usize>,
        /// Sweep these coarse-graining parameters at a fixed --nm instead.
        #[arg(long, value_delimiter = ',')]
        kappas: Option<Vec<usize>>,
        /// Interface resolution of the kappa sweep.
        #[arg(long, default_value_t = 1024)]
        nm: usize,
        /// Targeted mortar segments per blending host element.
        #[arg(long, default_value_t = 6.0)]
        mc: f64,
        #[command(flatten)]
        scheme: Scheme,
        #[command(flatten)]
        output: Output,
    },
    /// Plate with a hole or nested multi-level patches, SLI against CGI.
    Example {
        /// plate_with_hole or multi_level.
        name: ExampleName,
        /// Coarse-graining parameter of the CGI run.
        #[arg(long)]
        kappa: Option<usize>,
        /// Split blending quadrilaterals into triangles.
        #[arg(long)]
        triangulate: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Write the cut geometry of a configuration as VTK polygons, without solving.
    DumpCuts {
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

fn eshelby_base(n_m: usize, mc: f64, s: &Scheme) -> EshelbyConfig {
    let mut c = EshelbyConfig::new(n_m).with_scheme(s.dual.unwrap_or(DualScheme::SliP1), s.kappa.unwrap_or(Kappa::Auto));
    c.mc_target = mc;
    c.triangulate = s.triangulate;
    c
}

fn bench(b: Benchmark, out: &Output) -> CliResult<()> {
    for r in run_benchmark(&b, &output_dir(out.out.as_deref(), None))? {
        print_report(&r);
    }
    Ok(())
}

fn execute(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Run { config, scheme, dump_cuts, output } => {
            let mut cfg = read_config(&config)?;
            cfg.override_scheme(scheme.dual, scheme.kappa, scheme.triangulate);
            let out = output_dir(output.out.as_deref(), cfg.output.as_deref());
            for r in run_config(&config, &cfg, &out, dump_cuts)? {
                print_report(&r);
            }
            Ok(())
        }
        Command::PatchTest { case, load, host, contrast, seed, scheme, output } => {
            let mut c = PatchTestConfig::new(case, load)
                .with_scheme(scheme.dual.unwrap_or(DualScheme::SliP1), scheme.kappa.unwrap_or(Kappa::Auto));
            c.host = host;
            c.contrast = contrast;
            c.seed = seed;
            c.triangulate = scheme.triangulate;
            bench(Benchmark::PatchTest(c), &output)
        }
        Command::Eshelby { nm, mc, contrast, scheme, output } => {
            let mut c = eshelby_base(nm, mc, &scheme);
            c.contrast = contrast;
            bench(Benchmark::Eshelby(c), &output)
        }
        Command::Convergence { nms, kappas, nm, mc, scheme, output } => match kappas {
            Some(kappas) => bench(Benchmark::KappaSweep { base: eshelby_base(nm, mc, &scheme), kappas }, &output),
            None => bench(Benchmark::Convergence { base: eshelby_base(nms[0], mc, &scheme), n_ms: nms }, &output),
        },
        Command::Example { name, kappa, triangulate, output } => bench(Benchmark::Example { name, kappa, triangulate }, &output),
        Command::DumpCuts { config, output } => {
            let cfg = read_config(&config)?;
            let out = output_dir(output.out.as_deref(), cfg.output.as_deref());
            for p in dump_cuts(&config, &cfg, &out)? {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
