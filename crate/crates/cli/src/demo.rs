//! Synthetic dataset with the shape of the empirical application: ten sector
//! indexes, a CPI index and an industrial production index, monthly from
//! 2002M7 to 2015M10 (raw price indexes start a year earlier).

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::StandardNormal;

use sectorcoint_core::ingest::write_csv;
use sectorcoint_core::rng::substream;
use sectorcoint_core::series::{MonthIndex, TimeSeries};
use sectorcoint_core::ucsv::{simulate_ucsv_with, SimulationParams};
use sectorcoint_core::{Error, Result};

pub const DEMO_SEED: u64 = 2;
/// Seed written into the demo `pipeline.toml`.
pub const PIPELINE_SEED: u64 = 20_260_101;
pub const DEMO_N: usize = 160;

/// Long-run equation of a synthetic index in logs:
/// `c + dc D + g t + dg t D + bi I + dbi I D + bu U + dbu U D + u`,
/// `D` switching on after `brk`, `u` a stationary AR(1).
struct Equation {
    c: f64,
    dc: f64,
    g: f64,
    dg: f64,
    bi: f64,
    dbi: f64,
    bu: f64,
    dbu: f64,
    brk: (i32, u32),
}

enum Shape {
    Cointegrated(Equation),
    /// Log random walk with drift.
    Walk { drift: f64, sd: f64 },
}

fn indexes() -> Vec<(&'static str, Shape)> {
    use Shape::*;
    let lst = |c, dc, g, bi, bu, brk| {
        Cointegrated(Equation {
            c,
            dc,
            g,
            dg: 0.0,
            bi,
            dbi: 0.0,
            bu,
            dbu: 0.0,
            brk,
        })
    };
    let rst = |c, dc, g, dg, bi, dbi, bu, dbu, brk| {
        Cointegrated(Equation {
            c,
            dc,
            g,
            dg,
            bi,
            dbi,
            bu,
            dbu,
            brk,
        })
    };
    vec![
        ("DJUSBM", rst(4.95, 0.20, 0.014, -0.006, -0.013, 0.026, -0.38, 0.31, (2009, 4))),
        ("DJUSNC", rst(5.44, -0.34, 0.008, 0.002, -0.040, 0.036, -0.24, 0.23, (2009, 4))),
        ("DJUSCY", lst(5.69, -0.48, 0.010, -0.098, -0.39, (2010, 2))),
        ("DJUSFN", lst(6.24, -0.64, 0.003, -0.067, -0.27, (2008, 8))),
        ("DJUSHC", Walk { drift: 0.006, sd: 0.035 }),
        ("DJUSIN", lst(5.22, -0.52, 0.010, -0.030, -0.07, (2008, 7))),
        ("DJUSEN", Walk { drift: 0.004, sd: 0.060 }),
        ("DJUSTC", lst(5.94, -0.34, 0.009, -0.020, -0.09, (2008, 7))),
        ("DJUSTL", rst(4.64, -0.47, 0.010, -0.004, 0.007, 0.057, -0.34, 0.21, (2009, 10))),
        ("DJUSUT", rst(4.46, -0.51, 0.009, -0.005, 0.044, -0.021, -0.27, 0.28, (2009, 10))),
    ]
}

fn round(x: f64, digits: i32) -> f64 {
    let s = 10f64.powi(digits);
    (x * s).round() / s
}

fn normal(r: &mut impl Rng) -> f64 {
    r.sample(StandardNormal)
}

/// Raw series of the demo dataset: CPI and IP (172 months) and the ten
/// index levels (160 months).
pub fn generate_demo(seed: u64) -> Result<Vec<TimeSeries>> {
    let start = MonthIndex::from_parts(2002, 7);
    let raw_start = start.plus(-12);
    let params = SimulationParams {
        tau0: 2.5,
        sigma_eta0: 0.6,
        sigma_eps0: 0.15,
        start,
    };
    let paths = simulate_ucsv_with(&params, 0.04, DEMO_N, seed)?;
    let pi = paths.pi.values();
    let sig = paths.sigma_eta.values();

    let mut cpi: Vec<f64> = (0..12).map(|k| 180.0 * 1.002f64.powi(k)).collect();
    for t in 0..DEMO_N {
        let level = cpi[t] * (1.0 + pi[t] / 100.0);
        cpi.push(level);
    }
    let cpi: Vec<f64> = cpi.into_iter().map(|v| round(v, 3)).collect();

    let mut r = substream(seed, 1);
    let mut log_ip = 4.5;
    let ip: Vec<f64> = (0..DEMO_N + 12)
        .map(|_| {
            log_ip += 0.0015 + 0.007 * normal(&mut r);
            round(log_ip.exp() * 20.0, 4)
        })
        .collect();

    let mut out = vec![
        TimeSeries::new("CPI", raw_start, cpi)?,
        TimeSeries::new("IP", raw_start, ip)?,
    ];
    for (k, (name, shape)) in indexes().into_iter().enumerate() {
        let mut r = substream(seed, 10 + k as u64);
        let logs: Vec<f64> = match shape {
            Shape::Walk { drift, sd } => {
                let mut x = 5.0;
                (0..DEMO_N)
                    .map(|_| {
                        x += drift + sd * normal(&mut r);
                        x
                    })
                    .collect()
            }
            Shape::Cointegrated(e) => {
                let brk = start.months_until(MonthIndex::from_parts(e.brk.0, e.brk.1));
                let mut u = 0.0;
                (0..DEMO_N)
                    .map(|i| {
                        u = 0.5 * u + 0.03 * normal(&mut r);
                        let d = if i as i64 > brk { 1.0 } else { 0.0 };
                        let t = (i + 1) as f64;
                        e.c + e.dc * d
                            + (e.g + e.dg * d) * t
                            + (e.bi + e.dbi * d) * pi[i]
                            + (e.bu + e.dbu * d) * sig[i]
                            + u
                    })
                    .collect()
            }
        };
        let levels = logs.iter().map(|x| round(x.exp(), 2)).collect();
        out.push(TimeSeries::new(name, start, levels)?);
    }
    Ok(out)
}

fn manifest_text(ids: &[&str]) -> String {
    let mut s = String::from(
        "# Synthetic demo data; regenerate with `sectorcoint demo-data`.\n\n[window]\nstart = \"2002-07\"\nend = \"2015-10\"\n\n[[series]]\nid = \"I\"\nsource = \"csv\"\npath = \"CPI.csv\"\ntransform = \"yoy\"\n\n[[series]]\nid = \"IP\"\nsource = \"csv\"\npath = \"IP.csv\"\ntransform = \"yoy\"\n",
    );
    for id in ids {
        s.push_str(&format!(
            "\n[[series]]\nid = \"{id}\"\nsource = \"csv\"\npath = \"{id}.csv\"\ntransform = \"log\"\n"
        ));
    }
    s
}

fn pipeline_text(ids: &[&str]) -> String {
    let quoted: Vec<String> = ids.iter().map(|i| format!("\"{i}\"")).collect();
    format!(
        "seed = {}\nmanifest = \"manifest.toml\"\nout_dir = \"out\"\nwith_output = false\n\n[series]\ninflation = \"I\"\noutput = \"IP\"\nindexes = [{}]\n\n[ucsv]\ngamma = 0.04\nn_draws = 5000\nburn_in = 1000\n\n[gh]\ntrim = [0.15, 0.85]\nlag_rule = \"bic\"\n\n[decision]\nlevel = \"10%\"\nmin_rejections = 2\n\n[short_run]\nvar_lags = 2\necm_extra_lags = 0\n\n[cusum]\nlevel = \"5%\"\n",
        PIPELINE_SEED,
        quoted.join(", ")
    )
}

/// Writes the raw CSVs, `manifest.toml` and `pipeline.toml` into `dir`.
pub fn write_demo(dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
    let series = generate_demo(seed)?;
    let mut written = Vec::new();
    for s in &series {
        let path = dir.join(format!("{}.csv", s.id()));
        write_csv(s, &path)?;
        written.push(path);
    }
    let ids: Vec<&str> = series.iter().skip(2).map(|s| s.id()).collect();
    for (name, text) in [
        ("manifest.toml", manifest_text(&ids)),
        ("pipeline.toml", pipeline_text(&ids)),
    ] {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}
