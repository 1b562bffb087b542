use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use qcredit::dist::GammaParams;
use qcredit::eval::{
    auc_table, resampled_auc, roc_curve, roc_table, simulate_portfolio, simulate_superstat,
    PortfolioConfig, SimConfig,
};
use qcredit::inference::{self, fit_gaussian_mle, fit_qgaussian_mle, qq_pairs, AcfTransform};
use qcredit::market::{
    assets_table, build_assets, firms_table, log_returns, read_firms_csv, FirmSeries,
};
use qcredit::pipeline::{
    dtd_table, final_scores, fits_table, pd_table, qhist_table, run_pipeline, PipelineRun,
};
use qcredit::table::{Cell, Table};

use crate::config::RunConfig;
use crate::{Failure, LawKind, SimKind, Transform};

fn write_table(cfg: &RunConfig, stem: &str, t: &Table) -> Result<(), Failure> {
    let path = cfg.out_path(stem);
    write_to(&path, t, cfg.table_format())?;
    println!("wrote {} ({} rows)", path.display(), t.rows.len());
    Ok(())
}

fn write_to(path: &PathBuf, t: &Table, format: qcredit::table::Format) -> Result<(), Failure> {
    let f = File::create(path)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    t.write(BufWriter::new(f), format)?;
    Ok(())
}

fn load_store(cfg: &RunConfig) -> Result<Vec<FirmSeries>, Failure> {
    let path = cfg.store_path();
    let file = File::open(&path).map_err(|_| {
        Failure::usage(format!(
            "no firm store at {}; run `qcredit ingest <files>` with the same --out-dir first",
            path.display()
        ))
    })?;
    let ing = read_firms_csv(file)?;
    if !ing.rejects.is_empty() {
        return Err(Failure::usage(format!(
            "firm store {} has {} invalid rows; re-run ingest",
            path.display(),
            ing.rejects.len()
        )));
    }
    Ok(ing.firms)
}

fn report_failures(failures: &[(String, String)]) -> bool {
    for (id, msg) in failures {
        eprintln!("firm {id}: {msg}");
    }
    failures.is_empty()
}

fn pipeline(cfg: &RunConfig) -> Result<(Vec<FirmSeries>, PipelineRun), Failure> {
    let firms = load_store(cfg)?;
    let run = run_pipeline(&firms, &cfg.pipeline())?;
    Ok((firms, run))
}

/// Intervals between consecutive observations longer than a weekend.
fn date_gaps(f: &FirmSeries) -> usize {
    f.dates.windows(2).filter(|w| (w[1] - w[0]).num_days() > 4).count()
}

pub fn ingest(cfg: &RunConfig, files: Vec<PathBuf>) -> Result<bool, Failure> {
    let files = if files.is_empty() { cfg.input.clone() } else { files };
    if files.is_empty() {
        return Err(Failure::usage("ingest needs at least one input CSV"));
    }
    let mut firms: Vec<FirmSeries> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut rejects = Table::new(&["file", "line", "reason"]);
    let mut rows_read = 0;
    for path in &files {
        let file = File::open(path)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
        let ing = read_firms_csv(file).map_err(|e| Failure {
            code: 2,
            msg: format!("{}: {e}", path.display()),
        })?;
        rows_read += ing.rows_read;
        for r in &ing.rejects {
            eprintln!("{}:{}: {}", path.display(), r.line, r.reason);
            rejects.push(vec![path.display().to_string().into(), r.line.into(), r.reason.as_str().into()]);
        }
        for f in ing.firms {
            if !seen.insert(f.firm_id.clone()) {
                return Err(Failure::usage(format!(
                    "firm {} appears in more than one input file",
                    f.firm_id
                )));
            }
            firms.push(f);
        }
    }
    firms.sort_by(|a, b| a.firm_id.cmp(&b.firm_id));
    write_to(&cfg.store_path(), &firms_table(&firms), qcredit::table::Format::Csv)?;

    let mut report = Table::new(&["firm_id", "rows", "first_date", "last_date", "gaps", "defaulted_on"]);
    for f in &firms {
        report.push(vec![
            f.firm_id.as_str().into(),
            f.len().into(),
            f.dates.first().map_or(Cell::Empty, |d| d.to_string().into()),
            f.dates.last().map_or(Cell::Empty, |d| d.to_string().into()),
            date_gaps(f).into(),
            f.default_date.map_or(Cell::Empty, |d| d.to_string().into()),
        ]);
    }
    write_table(cfg, "ingest_report", &report)?;
    write_table(cfg, "rejects", &rejects)?;
    println!(
        "{} rows read, {} firms, {} rejects",
        rows_read,
        firms.len(),
        rejects.rows.len()
    );
    Ok(rejects.rows.is_empty())
}

pub fn assets(cfg: &RunConfig) -> Result<bool, Failure> {
    let firms = load_store(cfg)?;
    let pc = cfg.pipeline();
    let mut out = Vec::new();
    let mut failures = Vec::new();
    for f in &firms {
        match build_assets(f, pc.method, pc.dp_policy, pc.implied) {
            Ok(a) => out.push(a),
            Err(e) => failures.push((f.firm_id.clone(), e.to_string())),
        }
    }
    write_table(cfg, "assets", &assets_table(&out)?)?;
    Ok(report_failures(&failures))
}

pub fn fit(cfg: &RunConfig) -> Result<bool, Failure> {
    let (_, run) = pipeline(cfg)?;
    write_table(cfg, "fits", &fits_table(&run))?;
    Ok(report_failures(&run.failures))
}

pub fn pd(cfg: &RunConfig) -> Result<bool, Failure> {
    let (_, run) = pipeline(cfg)?;
    write_table(cfg, "pd", &pd_table(&run))?;
    Ok(report_failures(&run.failures))
}

pub fn dtd(cfg: &RunConfig) -> Result<bool, Failure> {
    let (_, run) = pipeline(cfg)?;
    write_table(cfg, "dtd", &dtd_table(&run))?;
    Ok(report_failures(&run.failures))
}

fn selected<'a>(firms: &'a [FirmSeries], firm: Option<&str>) -> Result<Vec<&'a FirmSeries>, Failure> {
    let out: Vec<_> = firms
        .iter()
        .filter(|f| firm.is_none_or(|id| f.firm_id == id))
        .collect();
    if out.is_empty() {
        return Err(Failure::usage(format!("firm {} not in the store", firm.unwrap_or("?"))));
    }
    Ok(out)
}

pub fn acf(cfg: &RunConfig, transform: Transform, max_lag: usize, firm: Option<&str>) -> Result<bool, Failure> {
    let firms = load_store(cfg)?;
    let pc = cfg.pipeline();
    let tr = match transform {
        Transform::Abs => AcfTransform::AbsReturn,
        Transform::Squared => AcfTransform::SquaredReturn,
        Transform::Raw => AcfTransform::RawReturn,
    };
    let mut t = Table::new(&["firm_id", "lag", "acf"]);
    let mut failures = Vec::new();
    for f in selected(&firms, firm)? {
        let r = build_assets(f, pc.method, pc.dp_policy, pc.implied)
            .and_then(|a| log_returns(&a))
            .and_then(|r| inference::acf(&r.v, tr, max_lag));
        match r {
            Ok(a) => {
                for (lag, v) in a.lags.iter().zip(&a.values) {
                    t.push(vec![f.firm_id.as_str().into(), (*lag).into(), (*v).into()]);
                }
            }
            Err(e) => failures.push((f.firm_id.clone(), e.to_string())),
        }
    }
    write_table(cfg, "acf", &t)?;
    Ok(report_failures(&failures))
}

pub fn qq(cfg: &RunConfig, law: LawKind, firm: Option<&str>) -> Result<bool, Failure> {
    let firms = load_store(cfg)?;
    let pc = cfg.pipeline();
    let mut t = Table::new(&["firm_id", "theoretical", "empirical"]);
    let mut failures = Vec::new();
    for f in selected(&firms, firm)? {
        let r = build_assets(f, pc.method, pc.dp_policy, pc.implied)
            .and_then(|a| log_returns(&a))
            .and_then(|r| {
                let n = r.len();
                if n < pc.window {
                    return Err(qcredit::Error::InsufficientData(format!(
                        "{} returns, window needs {}",
                        n, pc.window
                    )));
                }
                let w = &r.v[n - pc.window..];
                let fit = match law {
                    LawKind::Q => fit_qgaussian_mle(w, None)?,
                    LawKind::Gaussian => fit_gaussian_mle(w)?,
                };
                qq_pairs(w, &fit.law())
            });
        match r {
            Ok(pairs) => {
                for (x, y) in pairs {
                    t.push(vec![f.firm_id.as_str().into(), x.into(), y.into()]);
                }
            }
            Err(e) => failures.push((f.firm_id.clone(), e.to_string())),
        }
    }
    write_table(cfg, "qq", &t)?;
    Ok(report_failures(&failures))
}

pub fn qhist(cfg: &RunConfig, bin_width: f64) -> Result<bool, Failure> {
    let (firms, run) = pipeline(cfg)?;
    write_table(cfg, "qhist", &qhist_table(&run, &firms, bin_width)?)?;
    Ok(report_failures(&run.failures))
}

pub fn roc(cfg: &RunConfig, repeats: usize) -> Result<bool, Failure> {
    let (firms, run) = pipeline(cfg)?;
    let scores = final_scores(&run, &firms);
    let s: Vec<f64> = scores.iter().map(|x| x.score).collect();
    let l: Vec<bool> = scores.iter().map(|x| x.defaulted).collect();
    let curve = roc_curve(&s, &l)?;
    write_table(cfg, "roc", &roc_table(&curve))?;
    let dist = resampled_auc(&scores, repeats, cfg.seed)?;
    write_table(cfg, "auc", &auc_table(&dist))?;
    println!(
        "full-sample AUC {}, resampled AUC mean {} sd {} over {} repeats",
        qcredit::table::num(curve.auc),
        qcredit::table::num(dist.mean),
        qcredit::table::num(dist.std_dev),
        repeats
    );
    Ok(report_failures(&run.failures))
}

pub fn simulate(
    cfg: &RunConfig,
    kind: SimKind,
    shape: f64,
    rate: f64,
    regime_len: usize,
    days: usize,
) -> Result<bool, Failure> {
    match kind {
        SimKind::Portfolio => {
            let firms = simulate_portfolio(&PortfolioConfig::standard(cfg.seed))?;
            let series: Vec<_> = firms.into_iter().map(|f| f.series).collect();
            write_table(cfg, "simulated_firms", &firms_table(&series))?;
        }
        SimKind::Returns => {
            let sc = SimConfig::new(GammaParams::new(shape, rate)?, regime_len, days, cfg.seed)?;
            let r = simulate_superstat(&sc)?;
            let mut t = Table::new(&["day", "v"]);
            for (i, v) in r.v.iter().enumerate() {
                t.push(vec![(i + 1).into(), (*v).into()]);
            }
            write_table(cfg, "simulated_returns", &t)?;
        }
    }
    Ok(true)
}
