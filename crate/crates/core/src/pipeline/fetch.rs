//! Platform client: day-by-day unavailability queries through the cache.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use chrono::{NaiveDate, Utc};

use super::cache::{Cache, CacheEntry};
use crate::error::{Error, Result};
use crate::ingest::ZoneMap;

/// Documents per page returned by the platform.
pub const PAGE_SIZE: usize = 200;
/// The platform refuses offsets beyond this.
pub const MAX_OFFSET: usize = 4800;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

/// Performs one GET. `Err` means no response was received at all.
pub trait Transport: Sync {
    fn get(&self, url: &str, query: &[(&str, String)]) -> std::result::Result<HttpResponse, String>;
}

pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .user_agent(concat!("gen-outage/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| Error::Fetch(e.to_string()))?;
        Ok(Self { client })
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str, query: &[(&str, String)]) -> std::result::Result<HttpResponse, String> {
        let resp = self.client.get(url).query(query).send().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp.bytes().map_err(|e| e.to_string())?.to_vec();
        Ok(HttpResponse { status, body })
    }
}

#[derive(Debug, Clone)]
pub struct FetchOptions {
    pub base_url: String,
    pub token: Option<String>,
    pub request_delay: Duration,
    pub max_in_flight: usize,
    pub max_retries: u32,
    pub retry_base: Duration,
}

/// One (zone, document type, day) to fetch.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DayJob {
    pub zone: String,
    pub doc_type: String,
    pub date: NaiveDate,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FetchSummary {
    pub cached: usize,
    pub fetched: usize,
    pub requests: usize,
}

pub struct Fetcher<'a, T: Transport> {
    transport: &'a T,
    cache: &'a Cache,
    zones: &'a ZoneMap,
    opts: FetchOptions,
    requests: AtomicUsize,
}

fn query_time(d: NaiveDate) -> String {
    d.format("%Y%m%d0000").to_string()
}

fn is_zip(body: &[u8]) -> bool {
    body.starts_with(b"PK\x03\x04")
}

fn is_acknowledgement(body: &[u8]) -> bool {
    body.windows(30).any(|w| w == b"Acknowledgement_MarketDocument")
}

fn count_documents(xml: &[u8]) -> usize {
    let tag = b"<Unavailability_MarketDocument";
    xml.windows(tag.len()).filter(|w| w == tag).count()
}

impl<'a, T: Transport> Fetcher<'a, T> {
    pub fn new(transport: &'a T, cache: &'a Cache, zones: &'a ZoneMap, opts: FetchOptions) -> Self {
        Self {
            transport,
            cache,
            zones,
            opts,
            requests: AtomicUsize::new(0),
        }
    }

    /// Raw documents of one day, from the cache if present, else fetched
    /// (all pages) and cached before returning.
    pub fn fetch_day(&self, zone: &str, doc_type: &str, date: NaiveDate) -> Result<(CacheEntry, bool)> {
        if let Some(hit) = self.cache.get(zone, doc_type, date)? {
            return Ok((hit, false));
        }
        let token = self.opts.token.as_deref().ok_or_else(|| {
            Error::Auth(format!(
                "{zone} {doc_type} {date} is not cached and no API token is set ({})",
                super::config::TOKEN_ENV
            ))
        })?;
        let area = self
            .zones
            .area_code(zone)
            .ok_or_else(|| Error::Usage(format!("zone {zone} has no area code")))?;
        let next = date.succ_opt().expect("date in range");

        let mut payload = Vec::new();
        let mut offset = 0;
        loop {
            let query = vec![
                ("securityToken", token.to_string()),
                ("documentType", doc_type.to_string()),
                ("biddingZone_Domain", area.to_string()),
                ("periodStart", query_time(date)),
                ("periodEnd", query_time(next)),
                ("offset", offset.to_string()),
            ];
            let body = self.get_with_retry(&query, &format!("{zone} {doc_type} {date} offset {offset}"))?;
            let (docs, xml) = if is_zip(&body) {
                let members = crate::ingest::unzip_members(&body)?;
                let n = members.len();
                let mut joined = Vec::new();
                for m in members {
                    joined.extend_from_slice(&m);
                    joined.push(b'\n');
                }
                (n, joined)
            } else {
                (count_documents(&body), body)
            };
            let last_page = docs < PAGE_SIZE || is_acknowledgement(&xml) || offset >= MAX_OFFSET;
            payload.extend_from_slice(&xml);
            if last_page {
                break;
            }
            offset += PAGE_SIZE;
        }
        Ok((self.cache.put(zone, doc_type, date, payload, Utc::now())?, true))
    }

    fn get_with_retry(&self, query: &[(&str, String)], what: &str) -> Result<Vec<u8>> {
        let mut attempt = 0;
        loop {
            std::thread::sleep(self.opts.request_delay);
            self.requests.fetch_add(1, Ordering::Relaxed);
            let failure = match self.transport.get(&self.opts.base_url, query) {
                Ok(r) if r.status == 200 => return Ok(r.body),
                Ok(r) if r.status == 401 || r.status == 403 => {
                    return Err(Error::Auth(format!("{what}: server answered {}", r.status)))
                }
                // the platform reports "no matching data" as 400 with an acknowledgement
                Ok(r) if r.status == 400 && is_acknowledgement(&r.body) => return Ok(r.body),
                Ok(r) if r.status == 429 || r.status >= 500 => format!("server answered {}", r.status),
                Ok(r) => {
                    return Err(Error::Fetch(format!(
                        "{what}: server answered {}: {}",
                        r.status,
                        String::from_utf8_lossy(&r.body[..r.body.len().min(200)])
                    )))
                }
                Err(e) => e,
            };
            if attempt >= self.opts.max_retries {
                return Err(Error::Fetch(format!("{what}: {failure} (after {} attempts)", attempt + 1)));
            }
            log::warn!("{what}: {failure}; retrying");
            std::thread::sleep(self.opts.retry_base * 2u32.saturating_pow(attempt));
            attempt += 1;
        }
    }

    /// Fetches every job with at most `max_in_flight` requests at a time.
    ///
    /// On failure the error of the earliest failing job is returned; an
    /// authentication failure stops all workers.
    pub fn fetch_all(&self, jobs: &[DayJob]) -> Result<FetchSummary> {
        let next = AtomicUsize::new(0);
        let stop = AtomicBool::new(false);
        let cached = AtomicUsize::new(0);
        let fetched = AtomicUsize::new(0);
        let errors: Mutex<Vec<(usize, Error)>> = Mutex::new(Vec::new());
        let workers = self.opts.max_in_flight.clamp(1, jobs.len().max(1));
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    if stop.load(Ordering::Relaxed) {
                        break;
                    }
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(job) = jobs.get(i) else { break };
                    match self.fetch_day(&job.zone, &job.doc_type, job.date) {
                        Ok((_, true)) => _ = fetched.fetch_add(1, Ordering::Relaxed),
                        Ok((_, false)) => _ = cached.fetch_add(1, Ordering::Relaxed),
                        Err(e) => {
                            if matches!(e, Error::Auth(_)) {
                                stop.store(true, Ordering::Relaxed);
                            }
                            errors.lock().expect("no panics while held").push((i, e));
                        }
                    }
                });
            }
        });
        let mut errors = errors.into_inner().expect("no panics while held");
        errors.sort_by_key(|e| e.0);
        if let Some((_, e)) = errors.into_iter().next() {
            return Err(e);
        }
        Ok(FetchSummary {
            cached: cached.into_inner(),
            fetched: fetched.into_inner(),
            requests: self.requests.load(Ordering::Relaxed),
        })
    }
}
