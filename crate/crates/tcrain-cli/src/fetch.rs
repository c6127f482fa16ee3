//! Manifest-driven download: one URL per line, optional bearer token, atomic
//! writes, size-based skip and bounded retries.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread::sleep;
use std::time::Duration;

use crate::error::{CliError, CliResult};

const MAX_ATTEMPTS: u32 = 4; // first try plus up to three retries
const BASE_BACKOFF_MS: u64 = 200;
const BODY_LIMIT: u64 = 4 * 1024 * 1024 * 1024;

#[derive(Debug, PartialEq)]
pub enum FetchStatus {
    Downloaded(u64),
    SkippedSameSize,
}

pub fn run_fetch(manifest: &Path, token: Option<&str>, dest_dir: &Path) -> CliResult<()> {
    let text = fs::read_to_string(manifest)
        .map_err(|e| CliError::Config(format!("manifest {}: {e}", manifest.display())))?;
    let urls: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    fs::create_dir_all(dest_dir)
        .map_err(|e| CliError::Processing(format!("{}: {e}", dest_dir.display())))?;

    let agent = ureq::Agent::new_with_defaults();
    let mut failures: Vec<(String, String)> = Vec::new();
    let mut downloaded = 0usize;
    let mut skipped = 0usize;

    for url in &urls {
        match fetch_one(&agent, url, token, dest_dir) {
            Ok(FetchStatus::Downloaded(bytes)) => {
                downloaded += 1;
                println!("downloaded {url} ({bytes} bytes)");
            }
            Ok(FetchStatus::SkippedSameSize) => {
                skipped += 1;
                println!("skipped {url} (existing file has the same size)");
            }
            Err(e) => failures.push((url.to_string(), e)),
        }
    }

    println!(
        "fetch: {downloaded} downloaded, {skipped} skipped, {} failed of {}",
        failures.len(),
        urls.len()
    );
    if failures.is_empty() {
        Ok(())
    } else {
        let list = failures
            .iter()
            .map(|(url, e)| format!("  {url}: {e}"))
            .collect::<Vec<_>>()
            .join("\n");
        Err(CliError::Processing(format!(
            "{} of {} downloads failed:\n{list}",
            failures.len(),
            urls.len()
        )))
    }
}

fn fetch_one(
    agent: &ureq::Agent,
    url: &str,
    token: Option<&str>,
    dest_dir: &Path,
) -> Result<FetchStatus, String> {
    let filename = file_name_of(url)?;
    let dest = dest_dir.join(&filename);
    let existing_size = fs::metadata(&dest).ok().map(|m| m.len());

    let mut last_error = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        if attempt > 0 {
            sleep(Duration::from_millis(BASE_BACKOFF_MS << (attempt - 1)));
        }
        let mut request = agent.get(url);
        if let Some(token) = token {
            request = request.header("Authorization", format!("Bearer {token}"));
        }
        match request.call() {
            Ok(mut response) => {
                if let (Some(existing), Some(remote)) =
                    (existing_size, response.body().content_length())
                {
                    if existing == remote {
                        return Ok(FetchStatus::SkippedSameSize);
                    }
                }
                return write_atomically(&mut response, dest_dir, &filename, &dest)
                    .map_err(|e| format!("write {}: {e}", dest.display()));
            }
            Err(ureq::Error::StatusCode(code)) => {
                last_error = format!("http status {code}");
                // client errors are deterministic; retrying cannot help
                if (400..500).contains(&code) && code != 429 {
                    return Err(last_error);
                }
            }
            Err(e) => last_error = e.to_string(),
        }
    }
    Err(format!("{last_error} (after {MAX_ATTEMPTS} attempts)"))
}

fn write_atomically(
    response: &mut ureq::http::Response<ureq::Body>,
    dest_dir: &Path,
    filename: &str,
    dest: &Path,
) -> std::io::Result<FetchStatus> {
    let tmp: PathBuf = dest_dir.join(format!(".partial-{filename}"));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        let mut reader = response.body_mut().with_config().limit(BODY_LIMIT).reader();
        let bytes = std::io::copy(&mut reader, &mut file)?;
        file.sync_all()?;
        drop(file);
        fs::rename(&tmp, dest)?;
        Ok(FetchStatus::Downloaded(bytes))
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn file_name_of(url: &str) -> Result<String, String> {
    let no_query = url.split(['?', '#']).next().unwrap_or(url);
    let name = no_query.rsplit('/').next().unwrap_or("");
    if name.is_empty() || name.contains(':') {
        return Err(format!("cannot derive a file name from '{url}'"));
    }
    Ok(name.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_names_come_from_the_last_path_segment() {
        assert_eq!(
            file_name_of("https://x.test/a/b/file.asc").unwrap(),
            "file.asc"
        );
        assert_eq!(file_name_of("https://x.test/f.h5?tok=1").unwrap(), "f.h5");
        assert!(file_name_of("https://x.test/").is_err());
    }
}
