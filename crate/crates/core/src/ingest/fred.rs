//! FRED observations client with an on-disk response cache.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::series::{MonthIndex, TimeSeries};

/// Environment variable holding the FRED API key.
pub const API_KEY_ENV: &str = "FRED_API_KEY";

pub const OBSERVATIONS_URL: &str = "https://api.stlouisfed.org/fred/series/observations";

/// Minimal HTTP GET abstraction so tests can count and script requests.
pub trait Transport: Send + Sync {
    /// Returns the status code and body. Non-2xx statuses are not errors here.
    fn get(&self, url: &str) -> Result<(u16, String)>;
}

/// Blocking HTTPS transport.
pub struct HttpTransport {
    agent: ureq::Agent,
}

impl Default for HttpTransport {
    fn default() -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        Self { agent }
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<(u16, String)> {
        let mut resp = self.agent.get(url).call().map_err(|e| Error::Transport {
            status: 0,
            message: e.to_string(),
        })?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| Error::Transport {
            status,
            message: e.to_string(),
        })?;
        Ok((status, body))
    }
}

#[derive(Deserialize)]
struct Envelope {
    #[serde(default)]
    observations: Option<Vec<Observation>>,
    #[serde(default)]
    error_code: Option<u16>,
    #[serde(default)]
    error_message: Option<String>,
}

#[derive(Deserialize)]
struct Observation {
    date: String,
    value: String,
}

fn service_error(status: u16, message: String) -> Error {
    if message.to_ascii_lowercase().contains("api_key") {
        Error::Authentication(message)
    } else {
        Error::Transport { status, message }
    }
}

/// Decodes an observations response. Missing values (`"."`) and skipped
/// months are gap errors; nothing is imputed.
pub fn decode_fred_json(body: &str, series_code: &str) -> Result<TimeSeries> {
    let env: Envelope = serde_json::from_str(body).map_err(|e| Error::Parse {
        line: e.line(),
        reason: e.to_string(),
    })?;
    if let Some(message) = env.error_message {
        return Err(service_error(env.error_code.unwrap_or(0), message));
    }
    let obs = env.observations.ok_or_else(|| Error::Parse {
        line: 1,
        reason: "response has no observations".into(),
    })?;
    let mut start: Option<MonthIndex> = None;
    let mut prev: Option<MonthIndex> = None;
    let mut values = Vec::with_capacity(obs.len());
    for (i, o) in obs.iter().enumerate() {
        let date: MonthIndex = o.date.parse().map_err(|e: Error| Error::Parse {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if let Some(p) = prev {
            if date <= p {
                return Err(Error::Duplicate(date));
            }
            if date != p.succ() {
                return Err(Error::Gap {
                    previous: p,
                    missing: p.succ(),
                });
            }
        }
        if o.value.trim() == "." {
            return Err(Error::Gap {
                previous: prev.unwrap_or(date.plus(-1)),
                missing: date,
            });
        }
        let v: f64 = o.value.trim().parse().map_err(|_| Error::Parse {
            line: i + 1,
            reason: format!("value '{}' is not a number", o.value),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: i + 1,
                reason: format!("value '{}' is not finite", o.value),
            });
        }
        start.get_or_insert(date);
        prev = Some(date);
        values.push(v);
    }
    let start = start.ok_or_else(|| Error::InvalidInput(format!("no observations for {series_code}")))?;
    TimeSeries::new(series_code, start, values)
}

fn check_token(kind: &str, s: &str) -> Result<()> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
        return Err(Error::InvalidInput(format!("{kind} '{s}' must be non-empty and alphanumeric")));
    }
    Ok(())
}

pub fn observations_url(series_code: &str, api_key: &str, window: (MonthIndex, MonthIndex)) -> String {
    format!(
        "{OBSERVATIONS_URL}?series_id={series_code}&api_key={api_key}&file_type=json&frequency=m\
         &observation_start={}-01&observation_end={}-01",
        window.0.iso(),
        window.1.iso()
    )
}

/// Writes `bytes` to `path` via a temporary file in the same directory and
/// a rename, so readers never see a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub struct FredClient {
    transport: Box<dyn Transport>,
    cache_dir: Option<PathBuf>,
}

impl FredClient {
    pub fn new(transport: Box<dyn Transport>, cache_dir: Option<PathBuf>) -> Self {
        Self { transport, cache_dir }
    }

    pub fn http(cache_dir: Option<PathBuf>) -> Self {
        Self::new(Box::new(HttpTransport::default()), cache_dir)
    }

    /// Cache file for `(code, window)`.
    pub fn cache_path(&self, series_code: &str, window: (MonthIndex, MonthIndex)) -> Option<PathBuf> {
        self.cache_dir
            .as_ref()
            .map(|d| d.join(format!("{series_code}_{}_{}.json", window.0.iso(), window.1.iso())))
    }

    /// Monthly observations for `window`, served from cache when present.
    pub fn fetch(&self, series_code: &str, api_key: &str, window: (MonthIndex, MonthIndex)) -> Result<TimeSeries> {
        check_token("series code", series_code)?;
        if window.0 > window.1 {
            return Err(Error::Range(format!("window {}..{} is empty", window.0, window.1)));
        }
        let cache = self.cache_path(series_code, window);
        if let Some(path) = &cache {
            if path.is_file() {
                let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                return decode_fred_json(&body, series_code);
            }
        }
        if api_key.trim().is_empty() {
            return Err(Error::Authentication(format!("{API_KEY_ENV} is not set")));
        }
        check_token("API key", api_key)?;
        let (status, body) = self.transport.get(&observations_url(series_code, api_key, window))?;
        if !(200..300).contains(&status) {
            let message = serde_json::from_str::<Envelope>(&body)
                .ok()
                .and_then(|e| e.error_message)
                .unwrap_or_else(|| body.chars().take(200).collect());
            return Err(service_error(status, message));
        }
        let series = decode_fred_json(&body, series_code)?;
        if let Some(path) = &cache {
            atomic_write(path, body.as_bytes())?;
        }
        Ok(series)
    }
}

/// Fetches over HTTPS with the given cache directory.
pub fn fetch_fred(
    series_code: &str,
    api_key: &str,
    window: (MonthIndex, MonthIndex),
    cache_dir: Option<&Path>,
) -> Result<TimeSeries> {
    FredClient::http(cache_dir.map(Path::to_path_buf)).fetch(series_code, api_key, window)
}
