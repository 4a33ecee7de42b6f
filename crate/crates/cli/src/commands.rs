use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use log::{info, warn};
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::json;

use invfield::bases::SelfConjBasis;
use invfield::fields::{bijoux_sample, sample_batch, sample_independent, Marginal};
use invfield::irrep::CMatrix;
use invfield::mixing::{
    check_mixing, orbit_orthogonality, s3_exact_mixing, witness_margin, MixingReport, Verdict,
    DEFAULT_RANK_TOL,
};
use invfield::stats::{
    bonferroni, check_column_structure, gaussianity_test, invariance_test_on, phase_invariance_test,
    rotation_transform, ColumnStructureReport, TestReport, MIN_SIGNIFICANCE_N,
};
use invfield::{GroupElement, RngStream};

use crate::args::{CheckMixingArgs, CommonArgs, DemoArgs, Dist, Format, SamplerArgs, SimulateArgs, Space, TestArgs, TestKind};
use crate::config::{
    build_basis, parse_alpha, parse_group_element, RunConfig, GROUP_STREAM, MIXING_STREAM,
    SAMPLE_STREAM,
};
use crate::csvio::{read_draws, write_draws, Draws};

/// Exit codes of the command line contract.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

/// z-score above which a covariance entry is flagged as nonzero.
const SIGNIFICANCE_Z: f64 = 4.0;

fn open_out(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn emit_json(out: Option<&Path>, value: &serde_json::Value, summary: &str) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => {
            let mut w = open_out(p)?;
            writeln!(w, "{text}")?;
            w.flush()?;
            println!("{summary}");
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn emit_csv_rows(out: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let write = |w: &mut dyn Write| -> Result<()> {
        let mut c = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        c.write_record(header)?;
        for r in rows {
            c.write_record(r)?;
        }
        c.flush()?;
        Ok(())
    };
    match out {
        Some(p) => {
            let mut w = open_out(p)?;
            write(&mut w)?;
            w.flush()?;
        }
        None => write(&mut std::io::stdout().lock())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct MixingOutput {
    config: RunConfig,
    verdict: Verdict,
    report: MixingReport,
    orbit: Option<invfield::mixing::OrbitReport>,
    exact: Option<invfield::mixing::S3Certificate>,
    given_g: Option<serde_json::Value>,
}

pub fn check_mixing_cmd(args: &CheckMixingArgs) -> Result<i32> {
    let format = args.common.format.unwrap_or(Format::Json);
    let mut config = RunConfig::new("check-mixing", &args.common, args.samples, format);
    config.tol = Some(args.tol);
    config.set("orbit", args.orbit);
    config.set("exact", args.exact);
    config.set("g", &args.g);
    if args.exact && (args.common.space != Space::S3 || args.common.basis != crate::args::BasisKind::Torus) {
        bail!("--exact needs --space s3 --basis torus");
    }
    let basis = build_basis(&args.common)?;
    info!("basis of dimension {} built", basis.dim());
    let rng = RngStream::new(args.common.seed, MIXING_STREAM);
    let report = check_mixing(&basis, args.samples, args.tol, &rng)?;
    info!("sampling verdict {:?}, margin {:.3e}", report.verdict, report.margin);

    let orbit = if args.orbit {
        let ext = basis.dim() * (basis.dim() - 1) / 2;
        Some(orbit_orthogonality(&basis, 200 * ext.max(1), DEFAULT_RANK_TOL, &rng.split(7))?)
    } else {
        None
    };
    if let Some(o) = &orbit {
        if !o.consistent {
            warn!("orbit criterion ({:?}) disagrees with sampling ({:?})", o.verdict, o.sampling_verdict);
        }
    }
    let exact = if args.exact {
        let ell = args.common.ell;
        Some(s3_exact_mixing(ell, 1, ell.div_ceil(2))?)
    } else {
        None
    };
    let given_g = match &args.g {
        Some(text) => {
            let g = parse_group_element(text, basis.space)?;
            let (margin, pair) = witness_margin(&basis, &g)?;
            Some(json!({ "g": g, "margin": margin, "pair": pair, "mixing": margin > args.tol }))
        }
        None => None,
    };

    let mut verdict = report.verdict;
    if verdict != Verdict::Mixing && exact.as_ref().is_some_and(|c| c.verdict == Verdict::Mixing) {
        verdict = Verdict::Mixing;
    }
    let output = MixingOutput {
        config,
        verdict,
        report,
        orbit,
        exact,
        given_g,
    };
    let summary = format!("verdict: {verdict:?} (margin {:.3e})", output.report.margin);
    match format {
        Format::Json => emit_json(args.common.out.as_deref(), &serde_json::to_value(&output)?, &summary)?,
        Format::Csv => {
            let r = &output.report;
            let (m1, m2) = r.pair.map_or((String::new(), String::new()), |(a, b)| (a.to_string(), b.to_string()));
            emit_csv_rows(
                args.common.out.as_deref(),
                &["verdict", "margin", "m1", "m2", "samples_used", "tol"],
                &[vec![
                    format!("{verdict:?}"),
                    format!("{:.16e}", r.margin),
                    m1,
                    m2,
                    r.samples_used.to_string(),
                    r.tol.to_string(),
                ]],
            )?;
        }
    }
    Ok(match verdict {
        Verdict::Mixing => EXIT_OK,
        Verdict::NotMixing => EXIT_NEGATIVE,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn marginal(s: &SamplerArgs) -> Result<Marginal> {
    Ok(match s.dist {
        Dist::Gaussian => Marginal::Gaussian { c: s.c },
        Dist::UniformDisc => Marginal::UniformDisc { r: s.r },
        Dist::TwoPoint => Marginal::TwoPoint { rho: s.rho },
        Dist::Bijoux => bail!("bijoux draws are matrices, not coefficient vectors"),
    })
}

/// Keys and draws of the configured sampler.
fn draw_inline(common: &CommonArgs, s: &SamplerArgs) -> Result<(Option<SelfConjBasis>, Draws)> {
    let rng = RngStream::new(common.seed, SAMPLE_STREAM);
    if s.dist == Dist::Bijoux {
        let alpha = bijoux_alpha(common, s)?;
        let d = alpha.len();
        let mats = sample_batch(s.n, &rng, |r| bijoux_sample(d - 1, &alpha, r))?;
        let keys = (0..(d * d) as i64).collect();
        // row-major flattening: k = i·d + j
        let values = mats
            .iter()
            .map(|m| (0..d * d).map(|k| m.b[(k / d, k % d)]).collect())
            .collect();
        return Ok((None, Draws { keys, values }));
    }
    let basis = Arc::new(build_basis(common)?);
    let m = marginal(s)?;
    let draws = sample_batch(s.n, &rng, |r| sample_independent(&basis, m, r))?;
    let keys = (0..basis.dim()).map(|p| basis.label(p)).collect();
    let values = draws.into_iter().map(|a| a.values).collect();
    Ok((Some((*basis).clone()), Draws { keys, values }))
}

fn bijoux_alpha(common: &CommonArgs, s: &SamplerArgs) -> Result<Vec<C64>> {
    if common.space != Space::Su2 {
        bail!("--dist bijoux needs --space su2");
    }
    let alpha = if s.alpha.is_empty() {
        let d = common.ell + 1;
        vec![C64::new(1.0 / (d as f64).sqrt(), 0.0); d]
    } else {
        parse_alpha(&s.alpha)?
    };
    if alpha.len() < 2 {
        bail!("bijoux needs at least 2 alpha entries");
    }
    Ok(alpha)
}

pub fn simulate_cmd(args: &SimulateArgs) -> Result<i32> {
    let format = args.common.format.unwrap_or(Format::Csv);
    let (_, draws) = draw_inline(&args.common, &args.sampler)?;
    info!("{} draws of {} coefficients", draws.values.len(), draws.keys.len());
    match format {
        Format::Csv => match &args.common.out {
            Some(p) => {
                let mut w = open_out(p)?;
                write_draws(&mut w, &draws.keys, &draws.values)?;
                w.flush()?;
            }
            None => write_draws(std::io::stdout().lock(), &draws.keys, &draws.values)?,
        },
        Format::Json => {
            let mut config = RunConfig::new("simulate", &args.common, args.sampler.n, format);
            config.set("sampler", sampler_json(&args.sampler));
            let value = json!({ "config": config, "keys": draws.keys, "draws": draws.values });
            emit_json(args.common.out.as_deref(), &value, "draws written")?;
        }
    }
    Ok(EXIT_OK)
}

fn sampler_json(s: &SamplerArgs) -> serde_json::Value {
    json!({ "dist": s.dist, "c": s.c, "r": s.r, "rho": s.rho, "alpha": s.alpha, "n": s.n })
}

#[derive(Serialize)]
struct TestOutput {
    config: RunConfig,
    #[serde(flatten)]
    report: TestReport,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    structure: Option<ColumnStructureReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    group_elements: Option<Vec<GroupElement>>,
}

fn check_keys(draws: &Draws, basis: &SelfConjBasis) -> Result<()> {
    let want: Vec<i64> = (0..basis.dim()).map(|p| basis.label(p)).collect();
    if draws.keys != want {
        bail!("CSV keys {:?} do not match the basis labels {:?}", draws.keys, want);
    }
    Ok(())
}

pub fn test_cmd(args: &TestArgs) -> Result<i32> {
    let format = args.common.format.unwrap_or(Format::Json);
    let (basis, draws) = match &args.input {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
            let draws = read_draws(f).with_context(|| format!("malformed CSV {}", path.display()))?;
            let basis = match args.kind {
                TestKind::Invariance => Some(build_basis(&args.common)?),
                _ => None,
            };
            (basis, draws)
        }
        None => draw_inline(&args.common, &args.sampler)?,
    };
    let n = draws.values.len();
    let mut config = RunConfig::new("test", &args.common, n, format);
    config.set("kind", args.kind);
    config.set("input", &args.input);
    config.set("level", args.level);
    if args.input.is_none() {
        config.set("sampler", sampler_json(&args.sampler));
    }

    let mut structure = None;
    let mut group_elements = None;
    let (report, pass) = match args.kind {
        TestKind::Invariance => {
            let basis = match basis {
                Some(b) => b,
                None => build_basis(&args.common)?,
            };
            check_keys(&draws, &basis)?;
            if n < 4 {
                bail!("invariance test needs at least 4 draws, got {n}");
            }
            let gs = group_list(args, &basis)?;
            config.set("n_g", gs.len());
            let (a, b) = draws.values.split_at(n / 2);
            let r = invariance_test_on(a, b, rotation_transform(&basis), &gs)?.with_seed(args.common.seed);
            group_elements = Some(gs);
            let pass = !r.rejects(args.level);
            (r, pass)
        }
        TestKind::Structure => {
            let d = (draws.keys.len() as f64).sqrt().round() as usize;
            if d * d != draws.keys.len() || draws.keys != (0..(d * d) as i64).collect::<Vec<_>>() {
                bail!("structure test needs flattened d×d matrices with k = 0..d²");
            }
            let mats: Vec<CMatrix> = draws
                .values
                .iter()
                .map(|v| CMatrix::from_fn(d, d, |i, j| v[i * d + j]))
                .collect();
            let s = check_column_structure(&mats)?;
            let z = s.max_cross_column_z.max(s.max_column_deviation_z);
            let pass = s.pass;
            // p-value of the largest z-score, Bonferroni over all compared entries
            let entries = (d * d * d * d) as f64;
            let p = (entries * (-z * z / 2.0).exp()).min(1.0);
            structure = Some(s);
            (TestReport::new("column_structure", z, p, n), pass)
        }
        TestKind::Gaussianity => {
            let mut reports = vec![];
            for k in 0..draws.keys.len() {
                for part in [0, 1] {
                    let xs: Vec<f64> = draws.values.iter().map(|v| if part == 0 { v[k].re } else { v[k].im }).collect();
                    if xs.iter().all(|x| *x == xs[0]) {
                        continue;
                    }
                    reports.push(gaussianity_test(&xs)?);
                }
            }
            if reports.is_empty() {
                bail!("degenerate variance in every coordinate");
            }
            let r = bonferroni("gaussianity", &reports, n);
            let pass = !r.rejects(args.level);
            (r, pass)
        }
        TestKind::Phase => {
            let mut reports = vec![];
            for (k, key) in draws.keys.iter().enumerate() {
                if *key == 0 {
                    continue;
                }
                let zs: Vec<C64> = draws.values.iter().map(|v| v[k]).collect();
                reports.push(phase_invariance_test(&zs, args.phi)?);
            }
            if reports.is_empty() {
                bail!("no coordinate with a nontrivial torus character");
            }
            config.set("phi", args.phi);
            let r = bonferroni("phase_invariance", &reports, n / 2);
            let pass = !r.rejects(args.level);
            (r, pass)
        }
    };
    let report = report.with_seed(args.common.seed);
    let summary = format!(
        "{}: statistic {:.4e}, p = {:.4e}, {}",
        report.test,
        report.statistic,
        report.p_value,
        if pass { "pass" } else { "reject" }
    );
    let output = TestOutput {
        config,
        report,
        pass,
        structure,
        group_elements,
    };
    match format {
        Format::Json => emit_json(args.common.out.as_deref(), &serde_json::to_value(&output)?, &summary)?,
        Format::Csv => emit_csv_rows(
            args.common.out.as_deref(),
            &["test", "statistic", "p_value", "n", "pass"],
            &[vec![
                output.report.test.clone(),
                format!("{:.16e}", output.report.statistic),
                format!("{:.16e}", output.report.p_value),
                output.report.n.to_string(),
                pass.to_string(),
            ]],
        )?,
    }
    Ok(if pass { EXIT_OK } else { EXIT_NEGATIVE })
}

fn group_list(args: &TestArgs, basis: &SelfConjBasis) -> Result<Vec<GroupElement>> {
    if let Some(text) = &args.g {
        return Ok(vec![parse_group_element(text, basis.space)?]);
    }
    if args.witness {
        let rng = RngStream::new(args.common.seed, MIXING_STREAM);
        let r = check_mixing(basis, invfield::mixing::DEFAULT_SAMPLES, invfield::mixing::DEFAULT_TOL, &rng)?;
        match r.witness_g {
            Some(g) => return Ok(vec![g]),
            None => warn!("no mixing witness found ({:?}); using random elements", r.verdict),
        }
    }
    if args.n_g == 0 {
        bail!("--n-g must be positive");
    }
    let mut rng = RngStream::new(args.common.seed, GROUP_STREAM);
    Ok((0..args.n_g).map(|_| basis.space.haar(&mut rng)).collect())
}

pub fn demo_cmd(args: &DemoArgs) -> Result<i32> {
    let alpha = parse_alpha(&args.alpha)?;
    if alpha.len() < 2 {
        bail!("demo-nonorthogonal needs at least 2 alpha entries, got {}", alpha.len());
    }
    if args.n < 2 {
        bail!("--n must be at least 2");
    }
    let format = args.format.unwrap_or(Format::Json);
    let d = alpha.len();
    let rng = RngStream::new(args.seed, SAMPLE_STREAM);
    let mats: Vec<CMatrix> = sample_batch(args.n, &rng, |r| bijoux_sample(d - 1, &alpha, r))?
        .into_iter()
        .map(|s| s.b)
        .collect();
    let s = check_column_structure(&mats)?;
    let insufficient = args.n < MIN_SIGNIFICANCE_N;
    let c = &s.pooled.c_hat;
    let se = &s.pooled.std_err;
    let mut rows = vec![];
    let mut flags = vec![vec![false; d]; d];
    for i in 0..d {
        for k in 0..d {
            let expected = alpha[i] * alpha[k].conj();
            let z = if se[(i, k)] > 0.0 { c[(i, k)].norm() / se[(i, k)] } else { 0.0 };
            let significant = i != k && !insufficient && z > SIGNIFICANCE_Z;
            flags[i][k] = significant;
            rows.push(vec![
                i.to_string(),
                k.to_string(),
                format!("{:.16e}", c[(i, k)].re),
                format!("{:.16e}", c[(i, k)].im),
                format!("{:.16e}", se[(i, k)]),
                format!("{:.16e}", expected.re),
                format!("{:.16e}", expected.im),
                format!("{z:.6}"),
                significant.to_string(),
            ]);
        }
    }
    let header = ["i", "k", "c_re", "c_im", "std_err", "expected_re", "expected_im", "z", "significant"];
    if let Some(t) = &args.table {
        emit_csv_rows(Some(t), &header, &rows)?;
    }
    let config = json!({
        "command": "demo-nonorthogonal",
        "space": "su2",
        "ell": d - 1,
        "seed": args.seed,
        "samples": args.n,
        "out": args.out,
        "format": format,
        "alpha": args.alpha,
        "table": args.table,
    });
    let expected: Vec<Vec<C64>> = (0..d).map(|i| (0..d).map(|k| alpha[i] * alpha[k].conj()).collect()).collect();
    let value = json!({
        "config": config,
        "n": args.n,
        "c_hat": (0..d).map(|i| (0..d).map(|k| c[(i, k)]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "std_err": (0..d).map(|i| (0..d).map(|k| se[(i, k)]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "expected": expected,
        "significant_offdiagonal": flags,
        "insufficient_n": insufficient,
        "structure": {
            "max_cross_column_z": s.max_cross_column_z,
            "max_column_deviation_z": s.max_column_deviation_z,
            "pass": s.pass,
        },
    });
    let any = flags.iter().flatten().any(|f| *f);
    let summary = if insufficient {
        format!("n = {} is below {MIN_SIGNIFICANCE_N}: insufficient n, no significance claims", args.n)
    } else {
        format!("off-diagonal covariance significantly nonzero: {any}")
    };
    match format {
        Format::Json => emit_json(args.out.as_deref(), &value, &summary)?,
        Format::Csv => emit_csv_rows(args.out.as_deref(), &header, &rows)?,
    }
    if insufficient && args.out.is_none() {
        eprintln!("{summary}");
    }
    Ok(EXIT_OK)
}
