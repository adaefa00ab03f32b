//! One function per subcommand; each returns the text to write to the
//! output destination.

use crate::config::Config;
use crate::csvout::CsvDoc;
use crate::CliError;
use freeprob_core::bai::{bai_bound_corollary, bai_bound_theorem};
use freeprob_core::freeconv::{
    convolution_atoms, free_clt_series, free_convolve, nfold_atoms, AtomList, CltOptions,
    ConvolveOptions,
};
use freeprob_core::matrix::{
    check_operator_inequalities, derive_stream_seed, gue_rng, hermitian_eigenvalues, sample_gue,
    trace_resolvent_from_eigenvalues, SelfNormalizedAccumulator,
};
use freeprob_core::measure::{kolmogorov_distance_detailed, linspace};
use freeprob_core::rates::rate_fit;
use freeprob_core::textio::fmt17;
use freeprob_core::transforms::{semicircle_cauchy, HalfPlanePoint};
use freeprob_core::{BaiBreakdown, BaiParameters, Measure};
use num_complex::Complex64;
use rayon::prelude::*;
use std::fs;
use std::path::Path;

fn load_measure(path: &str) -> Result<Measure, CliError> {
    let text = fs::read_to_string(Path::new(path))
        .map_err(|e| CliError::Io(format!("cannot read measure file {path:?}: {e}")))?;
    Measure::from_text(&text).map_err(|e| CliError::Io(format!("{path:?}: {e}")))
}

/// `semicircle`: density/CDF table of a semicircle law.
pub fn semicircle(cfg: &Config, seed: u64) -> Result<String, CliError> {
    cfg.validate("semicircle", &["variance", "points", "lo", "hi"])
        .map_err(CliError::Config)?;
    let variance = cfg.get_f64("semicircle", "variance").map_err(CliError::Config)?.unwrap_or(1.0);
    let points = cfg.get_usize("semicircle", "points").map_err(CliError::Config)?.unwrap_or(512);
    let m = Measure::semicircle(variance).map_err(|e| CliError::Gate(e.to_string()))?;
    let (slo, shi) = m.support_interval();
    let lo = cfg.get_f64("semicircle", "lo").map_err(CliError::Config)?.unwrap_or(slo - 0.5);
    let hi = cfg.get_f64("semicircle", "hi").map_err(CliError::Config)?.unwrap_or(shi + 0.5);
    if !(lo < hi) || points < 2 {
        return Err(CliError::Config("semicircle: empty grid".into()));
    }
    let mut doc = CsvDoc::new(seed, None, None);
    doc.meta("variance", &fmt17(variance));
    doc.header(&["x", "density", "cdf", "re_g_at_x_plus_i", "im_g_at_x_plus_i"]);
    for x in linspace(lo, hi, points) {
        let g = semicircle_cauchy(HalfPlanePoint::new(x, 1.0).expect("Im = 1"), variance);
        doc.row_f64(&[x, m.density_at(x), m.cdf(x), g.re, g.im]);
    }
    Ok(doc.finish())
}

/// `convolve`: free additive convolution of two serialized measures.
/// Prints the output measure; convergence diagnostics go to a side CSV
/// when `convolve.diagnostics` is set.
pub fn convolve(cfg: &Config, seed: u64) -> Result<String, CliError> {
    cfg.validate(
        "convolve",
        &[
            "left",
            "right",
            "resolution",
            "eta",
            "tol",
            "max_iter",
            "window_lo",
            "window_hi",
            "diagnostics",
        ],
    )
    .map_err(CliError::Config)?;
    let left = cfg
        .get("convolve", "left")
        .ok_or_else(|| CliError::Config("convolve.left is required".into()))?;
    let right = cfg
        .get("convolve", "right")
        .ok_or_else(|| CliError::Config("convolve.right is required".into()))?;
    let m1 = load_measure(left)?;
    let m2 = load_measure(right)?;
    let mut opts = ConvolveOptions::default();
    if let Some(r) = cfg.get_usize("convolve", "resolution").map_err(CliError::Config)? {
        opts.resolution = r;
    }
    opts.eta = cfg.get_f64("convolve", "eta").map_err(CliError::Config)?;
    if let Some(t) = cfg.get_f64("convolve", "tol").map_err(CliError::Config)? {
        opts.tol = t;
    }
    if let Some(mi) = cfg.get_usize("convolve", "max_iter").map_err(CliError::Config)? {
        opts.max_iter = mi;
    }
    let wlo = cfg.get_f64("convolve", "window_lo").map_err(CliError::Config)?;
    let whi = cfg.get_f64("convolve", "window_hi").map_err(CliError::Config)?;
    if let (Some(lo), Some(hi)) = (wlo, whi) {
        opts.window = Some((lo, hi));
    }
    let out = free_convolve(&m1, &m2, &opts)?;
    if let Some(diag_path) = cfg.get("convolve", "diagnostics") {
        let mut doc = CsvDoc::new(seed, None, Some(opts.resolution));
        doc.meta("eta", &fmt17(out.diagnostics.eta));
        doc.meta("raw_mass", &fmt17(out.raw_mass));
        doc.header_line("x,iterations,residual,im_omega1,im_omega2");
        let d = &out.diagnostics;
        for i in 0..d.grid.len() {
            doc.row(&[
                fmt17(d.grid[i]),
                d.iterations[i].to_string(),
                fmt17(d.residuals[i]),
                fmt17(d.omega1[i].im),
                fmt17(d.omega2[i].im),
            ]);
        }
        fs::write(diag_path, doc.finish())
            .map_err(|e| CliError::Io(format!("cannot write {diag_path:?}: {e}")))?;
    }
    Ok(out.measure.to_text())
}

/// `clt`: normalized free-sum distributions of a serialized base measure
/// over a list of sample sizes, with the distance to the limit law.
pub fn clt(cfg: &Config, seed: u64) -> Result<String, CliError> {
    cfg.validate(
        "clt",
        &[
            "base",
            "sizes",
            "resolution",
            "first_level_resolution",
            "measure_dir",
        ],
    )
    .map_err(CliError::Config)?;
    let base_path = cfg
        .get("clt", "base")
        .ok_or_else(|| CliError::Config("clt.base is required".into()))?;
    let base = load_measure(base_path)?;
    let sizes = cfg
        .get_u32_list("clt", "sizes")
        .map_err(CliError::Config)?
        .unwrap_or_else(|| vec![4, 8, 16, 32, 64, 128, 256]);
    let mut opts = CltOptions::default();
    if let Some(r) = cfg.get_usize("clt", "resolution").map_err(CliError::Config)? {
        opts.resolution = r;
    }
    if let Some(r) = cfg
        .get_usize("clt", "first_level_resolution")
        .map_err(CliError::Config)?
    {
        opts.first_level_resolution = r;
    }
    let series = free_clt_series(&base, &sizes, &opts)?;
    let omega = Measure::standard_semicircle();
    let mut doc = CsvDoc::new(seed, None, None);
    doc.meta("base", base_path);
    doc.header(&["n", "distance", "distance_resolution_bound"]);
    for (n, m) in &series {
        let d = kolmogorov_distance_detailed(m, &omega);
        doc.row(&[n.to_string(), fmt17(d.value), fmt17(d.resolution_bound)]);
        if let Some(dir) = cfg.get("clt", "measure_dir") {
            let path = Path::new(dir).join(format!("clt_{n}.measure"));
            fs::write(&path, m.to_text())
                .map_err(|e| CliError::Io(format!("cannot write {path:?}: {e}")))?;
        }
    }
    Ok(doc.finish())
}

/// `bai`: certified distance-bound breakdown for a measure pair.
pub fn bai(cfg: &Config, seed: u64) -> Result<String, CliError> {
    cfg.validate(
        "bai",
        &["mu", "nu", "v", "epsilon", "a", "big_a", "big_b", "variant"],
    )
    .map_err(CliError::Config)?;
    let mu = load_measure(
        cfg.get("bai", "mu")
            .ok_or_else(|| CliError::Config("bai.mu is required".into()))?,
    )?;
    let nu = load_measure(
        cfg.get("bai", "nu")
            .ok_or_else(|| CliError::Config("bai.nu is required".into()))?,
    )?;
    let v = cfg.get_f64("bai", "v").map_err(CliError::Config)?.unwrap_or(0.1);
    let epsilon = cfg.get_f64("bai", "epsilon").map_err(CliError::Config)?.unwrap_or(1.2);
    let a = cfg.get_f64("bai", "a").map_err(CliError::Config)?.unwrap_or(2.0);
    let big_a = cfg.get_f64("bai", "big_a").map_err(CliError::Config)?.unwrap_or(8.0);
    let big_b = cfg.get_f64("bai", "big_b").map_err(CliError::Config)?.unwrap_or(3.0);
    let variant = cfg.get("bai", "variant").unwrap_or("both");
    let params = BaiParameters::new(v, epsilon, a, big_a, big_b)?;
    let delta = kolmogorov_distance_detailed(&mu, &nu);
    let mut doc = CsvDoc::new(seed, None, None);
    doc.meta("distance", &fmt17(delta.value));
    doc.meta("distance_resolution_bound", &fmt17(delta.resolution_bound));
    doc.header_line(&format!("variant,{}", BaiBreakdown::csv_header()));
    let mut emit = |name: &str, b: &BaiBreakdown| {
        doc.header_line(&format!("{name},{}", b.to_csv_row()));
    };
    match variant {
        "theorem" => emit("halfline", &bai_bound_theorem(&mu, &nu, &params)?),
        "corollary" => emit("anchored", &bai_bound_corollary(&mu, &nu, &params)?),
        "both" => {
            emit("halfline", &bai_bound_theorem(&mu, &nu, &params)?);
            emit("anchored", &bai_bound_corollary(&mu, &nu, &params)?);
        }
        other => {
            return Err(CliError::Config(format!(
                "bai.variant must be theorem|corollary|both, got {other:?}"
            )));
        }
    }
    Ok(doc.finish())
}

/// `gue-selfnorm`: self-normalized sums of independent GUE matrices; per
/// replica the resolvent-trace deviation from the semicircle transform at
/// z = i and the spectral range of the squared sum.
pub fn gue_selfnorm(cfg: &Config, seed: u64) -> Result<String, CliError> {
    cfg.validate("gue", &["summands", "dim", "replicas"]).map_err(CliError::Config)?;
    let n = cfg.get_usize("gue", "summands").map_err(CliError::Config)?.unwrap_or(16);
    let dim = cfg.get_usize("gue", "dim").map_err(CliError::Config)?.unwrap_or(128);
    let replicas = cfg.get_usize("gue", "replicas").map_err(CliError::Config)?.unwrap_or(5);
    if n == 0 || dim == 0 || replicas == 0 {
        return Err(CliError::Config("gue: zero-sized experiment".into()));
    }
    let z = Complex64::new(0.0, 1.0);
    let g_limit = semicircle_cauchy(HalfPlanePoint::new(0.0, 1.0).expect("Im = 1"), 1.0);
    let rows: Result<Vec<(u64, Vec<(String, f64)>)>, CliError> = (0..replicas as u64)
        .into_par_iter()
        .map(|replica| {
            let mut acc = SelfNormalizedAccumulator::new(dim);
            for matrix in 0..n as u64 {
                let mut rng = gue_rng(derive_stream_seed(seed, replica, matrix));
                acc.push(&sample_gue(dim, &mut rng))
                    .map_err(|e| CliError::Numeric(e.to_string()))?;
            }
            let sns = acc.finalize(None)?;
            let u_eigs = hermitian_eigenvalues(&sns.normalized)?;
            let tr = trace_resolvent_from_eigenvalues(&u_eigs, z);
            let stats = vec![
                ("resolvent_deviation".to_string(), (tr - g_limit).norm()),
                ("v2_min_eigenvalue".to_string(), sns.v2_eigenvalues[0]),
                (
                    "v2_max_eigenvalue".to_string(),
                    sns.v2_eigenvalues[dim - 1],
                ),
                (
                    "u_norm".to_string(),
                    u_eigs[0].abs().max(u_eigs[dim - 1].abs()),
                ),
            ];
            Ok((replica, stats))
        })
        .collect();
    let mut doc = CsvDoc::new(seed, Some(n), Some(dim));
    doc.header(&["seed", "n", "dim", "statistic", "value"]);
    for (replica, stats) in rows? {
        let replica_seed = derive_stream_seed(seed, replica, 0);
        for (name, value) in stats {
            doc.row(&[
                replica_seed.to_string(),
                n.to_string(),
                dim.to_string(),
                name,
                fmt17(value),
            ]);
        }
    }
    Ok(doc.finish())
}

/// `ineq`: operator-inequality report on seeded GUE families.
pub fn ineq(cfg: &Config, seed: u64) -> Result<String, CliError> {
    cfg.validate("ineq", &["summands", "dim", "replicas"]).map_err(CliError::Config)?;
    let n = cfg.get_usize("ineq", "summands").map_err(CliError::Config)?.unwrap_or(8);
    let dim = cfg.get_usize("ineq", "dim").map_err(CliError::Config)?.unwrap_or(32);
    let replicas = cfg.get_usize("ineq", "replicas").map_err(CliError::Config)?.unwrap_or(10);
    let mut doc = CsvDoc::new(seed, Some(n), Some(dim));
    doc.header(&["seed", "n", "dim", "check", "lhs", "rhs", "margin", "passed"]);
    for replica in 0..replicas as u64 {
        let xs: Vec<_> = (0..n as u64)
            .map(|matrix| {
                let mut rng = gue_rng(derive_stream_seed(seed, replica, matrix));
                sample_gue(dim, &mut rng)
            })
            .collect();
        let report = check_operator_inequalities(&xs, None)?;
        let replica_seed = derive_stream_seed(seed, replica, 0);
        for line in report.csv_rows().lines() {
            doc.header_line(&format!("{replica_seed},{n},{dim},{line}"));
        }
    }
    Ok(doc.finish())
}

/// `rate-fit`: least-squares decay fit of an (n, distance) series read from
/// a CSV file (comment lines and a header row are skipped).
pub fn ratefit(cfg: &Config, seed: u64) -> Result<String, CliError> {
    cfg.validate("ratefit", &["input", "with_log"]).map_err(CliError::Config)?;
    let path = cfg
        .get("ratefit", "input")
        .ok_or_else(|| CliError::Config("ratefit.input is required".into()))?;
    let with_log = cfg
        .get_bool("ratefit", "with_log")
        .map_err(CliError::Config)?
        .unwrap_or(false);
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {path:?}: {e}")))?;
    let mut series: Vec<(u32, f64)> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() < 2 {
            continue;
        }
        let Ok(n) = cells[0].trim().parse::<u32>() else {
            continue; // header row
        };
        let delta: f64 = cells[1]
            .trim()
            .parse()
            .map_err(|e| CliError::Io(format!("bad distance in {path:?}: {e}")))?;
        series.push((n, delta));
    }
    let fit = rate_fit(&series, with_log)?;
    let mut doc = CsvDoc::new(seed, None, None);
    doc.meta("input", path);
    doc.header(&["exponent", "constant", "log_factor_included", "max_abs_residual"]);
    doc.row(&[
        fmt17(fit.exponent),
        fmt17(fit.constant),
        fit.log_factor_included.to_string(),
        fmt17(fit.max_abs_residual),
    ]);
    Ok(doc.finish())
}

/// `atoms`: exact atom calculus for a pair of serialized measures, or the
/// n-fold composition of a single list.
pub fn atoms(cfg: &Config, seed: u64) -> Result<String, CliError> {
    cfg.validate("atoms", &["left", "right", "fold"]).map_err(CliError::Config)?;
    let left = load_measure(
        cfg.get("atoms", "left")
            .ok_or_else(|| CliError::Config("atoms.left is required".into()))?,
    )?;
    let a1 = AtomList::from_measure(&left);
    let result = match (cfg.get("atoms", "right"), cfg.get_usize("atoms", "fold").map_err(CliError::Config)?) {
        (Some(right), None) => {
            let a2 = AtomList::from_measure(&load_measure(right)?);
            convolution_atoms(&a1, &a2)
        }
        (None, Some(fold)) => {
            if fold < 2 {
                return Err(CliError::Config("atoms.fold must be at least 2".into()));
            }
            nfold_atoms(&a1, fold as u32)
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "atoms: give either atoms.right or atoms.fold, not both".into(),
            ));
        }
        (None, None) => {
            return Err(CliError::Config(
                "atoms: atoms.right or atoms.fold is required".into(),
            ));
        }
    };
    let mut doc = CsvDoc::new(seed, None, None);
    doc.header(&["location", "mass"]);
    for &(loc, mass) in result.entries() {
        doc.row_f64(&[loc, mass]);
    }
    Ok(doc.finish())
}
