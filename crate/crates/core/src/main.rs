//! Command-line front end: seeded, file-based workflows over the library.
//!
//! Every artifact is a JSON envelope `{seed, config_hash, payload}` so that
//! reruns with identical flags produce byte-identical files. Exit codes:
//! 0 success, 1 validation error, 2 certification failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use coneval::gaussbench;
use coneval::kernel::{isotropy_check, m_ratio_estimate};
use coneval::polyspace::inner_product;
use coneval::polytope::{
    build_deterministic, build_random, build_tensorized, default_tensor_epsilon,
};
use coneval::verifier::{certify_containment, Body, Ngon, NgonReport, SupportOracle};
use coneval::{
    ExponentVector, Poly64, PolytopeH64, PolytopeV64, SphereMomentCache, Subspace64,
};

#[derive(Parser)]
#[command(name = "coneval", version, about = "Polyhedral approximations to cones of nonnegative polynomials on subspaces")]
struct Cli {
    /// Cap on worker threads (0 uses the rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a subspace preset and write it as an artifact.
    Subspace {
        /// Preset: "full" (all of P_{n,2d}) or "sextic" (even symmetric sextics).
        #[arg(long, default_value = "full")]
        family: String,
        /// Number of variables.
        #[arg(long)]
        n: usize,
        /// Half-degree d (degree is 2d); ignored for the sextic family.
        #[arg(long, default_value_t = 1)]
        d: u32,
        /// Also report isotropy statistics with this many samples.
        #[arg(long)]
        isotropy_samples: Option<usize>,
        /// Also estimate the norm-ratio constant M(E) with this many trials.
        #[arg(long)]
        m_trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Deterministic inner/outer polytope pair from a sparsified decomposition.
    BuildDet {
        #[arg(long)]
        subspace: PathBuf,
        #[arg(long)]
        epsilon: f64,
        /// Sphere grid size for the near-touching sample.
        #[arg(long, default_value_t = 4000)]
        grid_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tensor-power refinement of the deterministic construction.
    BuildTensor {
        #[arg(long)]
        subspace: PathBuf,
        #[arg(long, short)]
        k: u32,
        /// Defaults to 1/(2e), the accuracy the asymptotic analysis fixes.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 4000)]
        grid_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Randomized polytope from i.i.d. mixture samples.
    BuildRandom {
        #[arg(long)]
        subspace: PathBuf,
        #[arg(long)]
        alpha: f64,
        /// Explicit facet count, overriding the theorem's sample formula.
        #[arg(long, short)]
        t: Option<usize>,
        /// Norm-ratio bound M; defaults to the safe bound 2^{2d}.
        #[arg(long)]
        m_bound: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Certify how well a polytope approximates B(E); exit 2 on failure.
    Verify {
        /// Subspace artifact defining the body B(E).
        #[arg(long)]
        body: PathBuf,
        /// Polytope artifact (V- or H-representation, auto-detected).
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long, default_value_t = 1000)]
        directions: usize,
        /// Support oracle: eigen | grid | sextic.
        #[arg(long, default_value = "grid")]
        oracle: String,
        /// Requested inner ratio; alpha_achieved below this exits 2.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-section of the even symmetric sextic cone; exit 2 unless it is
    /// an n-gon with matching support routes.
    Ngon {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 360)]
        angles: usize,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gaussian tail experiments and the vertex-count bound estimator.
    Bench {
        #[command(subcommand)]
        experiment: BenchCommand,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Lower norm concentration P(|v|^2 <= (1-eps)n) against exp(-eps^2 n/4).
    Lemma2 {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Tail decay of a mean-zero polynomial under the Gaussian measure.
    Lemma1 {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        d: u32,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Vertex-count lower bound for the hull of the coordinate evaluations.
    FacetBound {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        d: u32,
        /// Threshold t; defaults to sqrt(n(n+2d)/(4ed)).
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// On-disk wrapper for every JSON artifact.
#[derive(Serialize, Deserialize)]
struct Artifact<P> {
    seed: u64,
    config_hash: String,
    payload: P,
}

fn config_hash(parts: &[String]) -> String {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p.as_bytes());
        hasher.update([0u8]);
    }
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn write_artifact<P: Serialize>(path: &Path, seed: u64, config: &[String], payload: P) -> coneval::Result<()> {
    let artifact = Artifact { seed, config_hash: config_hash(config), payload };
    let text = serde_json::to_string_pretty(&artifact)
        .map_err(|e| coneval::Error::InvalidInput(format!("serialization failed: {e}")))?;
    std::fs::write(path, text)
        .map_err(|e| coneval::Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

fn read_artifact<P: DeserializeOwned>(path: &Path) -> coneval::Result<Artifact<P>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| coneval::Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| coneval::Error::InvalidInput(format!("{} does not parse: {e}", path.display())))
}

fn load_subspace(path: &Path) -> coneval::Result<Subspace64> {
    Ok(read_artifact::<SubspacePayload>(path)?.payload.subspace)
}

/// Either representation, auto-detected from the artifact payload.
enum AnyPolytope {
    V(PolytopeV64),
    H(PolytopeH64),
}

fn load_polytope(path: &Path) -> coneval::Result<AnyPolytope> {
    if let Ok(h) = read_artifact::<PolytopeH64>(path) {
        return Ok(AnyPolytope::H(h.payload));
    }
    if let Ok(v) = read_artifact::<PolytopeV64>(path) {
        return Ok(AnyPolytope::V(v.payload));
    }
    // builder artifacts store wrapped polytopes; prefer the outer H-polytope
    if let Ok(pair) = read_artifact::<DetPayload>(path) {
        return Ok(AnyPolytope::H(pair.payload.q));
    }
    if let Ok(tensor) = read_artifact::<TensorPayload>(path) {
        return Ok(AnyPolytope::H(tensor.payload.q));
    }
    if let Ok(random) = read_artifact::<RandomPayload>(path) {
        return Ok(AnyPolytope::H(random.payload.k_alpha));
    }
    Err(coneval::Error::InvalidInput(format!(
        "{} holds neither a polytope nor a builder artifact",
        path.display()
    )))
}

#[derive(Serialize, Deserialize)]
struct DetPayload {
    p: PolytopeV64,
    q: PolytopeH64,
    ratio_bound: f64,
}

#[derive(Serialize, Deserialize)]
struct TensorPayload {
    q: PolytopeH64,
    k: u32,
    epsilon: f64,
    ratio_bound: f64,
}

#[derive(Serialize, Deserialize)]
struct RandomPayload {
    k_alpha: PolytopeH64,
    alpha: f64,
    t: usize,
    m_bound: f64,
}

#[derive(Serialize, Deserialize)]
struct SubspacePayload {
    subspace: Subspace64,
    basis_ref: String,
    isotropy: Option<coneval::kernel::IsotropyReport<f64>>,
    m_ratio_estimate: Option<f64>,
}

fn parse_oracle(name: &str) -> coneval::Result<SupportOracle> {
    match name {
        "eigen" => Ok(SupportOracle::EigenExact),
        "grid" => Ok(SupportOracle::grid_default()),
        "sextic" => Ok(SupportOracle::SymmetricSexticExact),
        other => Err(coneval::Error::InvalidInput(format!(
            "unknown oracle '{other}' (expected eigen, grid, or sextic)"
        ))),
    }
}

/// Lemma-1 default test polynomial: `x_1^{2d}` minus its sphere mean.
fn mean_zero_power(n: usize, d: u32) -> coneval::Result<Poly64> {
    let mut exps = vec![0u32; n];
    exps[0] = 2 * d;
    let mono = Poly64::monomial(n, ExponentVector(exps), 1.0)?;
    let r = Poly64::r(n, d);
    let cache = SphereMomentCache::new();
    let mean = inner_product(&mono, &r, &cache)?;
    mono.sub(&r.scale(mean))
}

fn run(cli: Cli) -> coneval::Result<u8> {
    match cli.command {
        Command::Subspace { family, n, d, isotropy_samples, m_trials, seed, out } => {
            let cache = SphereMomentCache::new();
            let subspace = match family.as_str() {
                "full" => Subspace64::full(n, d, &cache)?,
                "sextic" => Subspace64::even_symmetric_sextics(n, &cache)?,
                other => {
                    return Err(coneval::Error::InvalidInput(format!(
                        "unknown family '{other}' (expected full or sextic)"
                    )))
                }
            };
            let isotropy = match isotropy_samples {
                Some(s) => Some(isotropy_check(&subspace, s, seed)?),
                None => None,
            };
            let m_est = match m_trials {
                Some(t) => Some(m_ratio_estimate(&subspace, t, seed)?),
                None => None,
            };
            let config = vec![
                "subspace".into(), family, n.to_string(), d.to_string(), seed.to_string(),
            ];
            let basis_ref = subspace.basis_ref();
            log::info!("subspace m = {}, basis_ref = {}", subspace.m, basis_ref);
            write_artifact(
                &out,
                seed,
                &config,
                SubspacePayload { subspace, basis_ref, isotropy, m_ratio_estimate: m_est },
            )?;
            Ok(0)
        }
        Command::BuildDet { subspace, epsilon, grid_size, seed, out } => {
            let e = load_subspace(&subspace)?;
            let (p, q, ratio_bound) = build_deterministic(&e, epsilon, grid_size, seed)?;
            log::info!(
                "deterministic pair: {} vertices, {} facets, ratio bound {ratio_bound:.4}",
                p.vertices.len(),
                q.normals.len()
            );
            let config = vec![
                "build-det".into(), epsilon.to_string(), grid_size.to_string(), seed.to_string(),
            ];
            write_artifact(&out, seed, &config, DetPayload { p, q, ratio_bound })?;
            Ok(0)
        }
        Command::BuildTensor { subspace, k, epsilon, grid_size, seed, out } => {
            let e = load_subspace(&subspace)?;
            let epsilon = epsilon.unwrap_or_else(default_tensor_epsilon::<f64>);
            let (q, ratio_bound) = build_tensorized(&e, k, epsilon, grid_size, seed)?;
            log::info!("Q_{k}: {} facets, ratio bound {ratio_bound:.4}", q.normals.len());
            let config = vec![
                "build-tensor".into(), k.to_string(), epsilon.to_string(),
                grid_size.to_string(), seed.to_string(),
            ];
            write_artifact(&out, seed, &config, TensorPayload { q, k, epsilon, ratio_bound })?;
            Ok(0)
        }
        Command::BuildRandom { subspace, alpha, t, m_bound, seed, out } => {
            let e = load_subspace(&subspace)?;
            let m_bound = m_bound.unwrap_or_else(|| 2f64.powi(e.two_d() as i32));
            let (k_alpha, t_used) = build_random(&e, alpha, t, m_bound, seed)?;
            log::info!("K_alpha with {} facets", k_alpha.normals.len());
            let config = vec![
                "build-random".into(), alpha.to_string(),
                t.map(|v| v.to_string()).unwrap_or_default(),
                m_bound.to_string(), seed.to_string(),
            ];
            write_artifact(
                &out,
                seed,
                &config,
                RandomPayload { k_alpha, alpha, t: t_used, m_bound },
            )?;
            Ok(0)
        }
        Command::Verify { body, polytope, directions, oracle, alpha, seed, out } => {
            let e = load_subspace(&body)?;
            let oracle = parse_oracle(&oracle)?;
            let loaded = load_polytope(&polytope)?;
            let report = match &loaded {
                AnyPolytope::V(p) => certify_containment(&e, Body::V(p), directions, &oracle, seed)?,
                AnyPolytope::H(h) => certify_containment(&e, Body::H(h), directions, &oracle, seed)?,
            };
            println!(
                "alpha_achieved = {:.6}, inner inclusion = {}, oracle certified = {}",
                report.alpha_achieved, report.inner_inclusion_ok, report.oracle_certified
            );
            if let Some(path) = out {
                let config = vec![
                    "verify".into(), directions.to_string(), oracle.describe(), seed.to_string(),
                ];
                write_artifact(&path, seed, &config, &report)?;
            }
            let requested_met = alpha.map_or(true, |a| report.alpha_achieved >= a);
            if requested_met && report.inner_inclusion_ok {
                Ok(0)
            } else {
                eprintln!("certification failed: alpha_achieved {:.6} (requested {:?}), inner inclusion {}",
                    report.alpha_achieved, alpha, report.inner_inclusion_ok);
                Ok(2)
            }
        }
        Command::Ngon { n, angles, tol, out } => {
            let report: NgonReport<f64> = Ngon::<f64>::new(n)?.check(angles, tol)?;
            println!(
                "n = {}, extreme points = {}, support mismatch = {:.3e}, affine-fit residual = {:.3}",
                report.n, report.extreme_points, report.support_mismatch, report.affine_fit_residual
            );
            let pass = report.pass;
            if let Some(path) = out {
                let config = vec!["ngon".into(), n.to_string(), angles.to_string(), tol.to_string()];
                write_artifact(&path, 0, &config, &report)?;
            }
            Ok(if pass { 0 } else { 2 })
        }
        Command::Bench { experiment } => match experiment {
            BenchCommand::Lemma2 { n, samples, seed, out } => {
                let eps_grid = [0.1, 0.2, 0.3, 0.4, 0.5];
                let report = gaussbench::lemma2_experiment(n, &eps_grid, samples, seed)?;
                std::fs::write(&out, report.to_csv()).map_err(|e| {
                    coneval::Error::InvalidInput(format!("cannot write {}: {e}", out.display()))
                })?;
                println!("lemma2: {} grid points, csv written to {}", eps_grid.len(), out.display());
                Ok(0)
            }
            BenchCommand::Lemma1 { n, d, samples, seed, out } => {
                let f = mean_zero_power(n, d)?;
                let base = ((n + 2 * d as usize) as f64).sqrt();
                let t_grid: Vec<f64> = [1.0, 1.25, 1.5, 1.75, 2.0].iter().map(|s| s * base).collect();
                let report = gaussbench::lemma1_experiment(&f, &t_grid, samples, seed)?;
                std::fs::write(&out, report.to_csv()).map_err(|e| {
                    coneval::Error::InvalidInput(format!("cannot write {}: {e}", out.display()))
                })?;
                println!("lemma1: fitted log-tail slope {:.4}", report.fit_slope);
                Ok(0)
            }
            BenchCommand::FacetBound { n, d, t, samples, seed, out } => {
                let cache = SphereMomentCache::new();
                let e = Subspace64::full(n, d, &cache)?;
                // hull of the coordinate evaluations, symmetrized
                let mut vertices = Vec::new();
                for i in 0..n {
                    let mut v = vec![0.0; n];
                    v[i] = 1.0;
                    let phi = e.phi(&v)?.coords;
                    vertices.push(phi.iter().map(|c| -c).collect());
                    vertices.push(phi);
                }
                let p = PolytopeV64::new(e.basis_ref(), vertices, true)?;
                let t = t.unwrap_or_else(|| gaussbench::default_facet_threshold(n, d));
                let estimate = gaussbench::facet_lower_bound_estimate(&e, &p, t, samples, seed)?;
                println!(
                    "facet bound: {:.4} (numerator {:.3e}, denominator {:.3e}, infinite = {})",
                    estimate.lower_bound, estimate.numerator, estimate.denominator, estimate.infinite
                );
                if let Some(path) = out {
                    let config = vec![
                        "facet-bound".into(), n.to_string(), d.to_string(), t.to_string(),
                        samples.to_string(), seed.to_string(),
                    ];
                    write_artifact(&path, seed, &config, &estimate)?;
                }
                Ok(0)
            }
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
