//! Text reports with a fixed header, plus CSV attachments.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use cdsplit_core::export::fmt_f64;
use cdsplit_core::weighted::SAMPLING_CAVEAT;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Run-wide facts repeated in every report header.
#[derive(Debug, Clone)]
pub struct Header {
    pub manifest_name: String,
    pub manifest_sha256: String,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub name: String,
    pub passed: bool,
    pub grid: String,
    pub tolerances: Vec<(String, f64)>,
    pub lines: Vec<String>,
    pub attachments: Vec<(String, Vec<u8>)>,
}

impl Report {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            passed: true,
            grid: "none".to_string(),
            tolerances: Vec::new(),
            lines: Vec::new(),
            attachments: Vec::new(),
        }
    }

    pub fn tol(&mut self, key: &str, v: f64) {
        self.tolerances.push((key.to_string(), v));
    }

    pub fn line(&mut self, key: &str, value: impl AsRef<str>) {
        self.lines.push(format!("{key}: {}", value.as_ref()));
    }

    pub fn num(&mut self, key: &str, v: f64) {
        self.line(key, fmt_f64(v));
    }

    /// Record a named check and fold it into the verdict.
    pub fn check(&mut self, key: &str, ok: bool) {
        self.passed &= ok;
        self.line(key, if ok { "pass" } else { "fail" });
    }

    pub fn attach(&mut self, file: &str, bytes: Vec<u8>) {
        self.attachments.push((file.to_string(), bytes));
    }

    pub fn status(&self) -> &'static str {
        if self.passed {
            "pass"
        } else {
            "fail"
        }
    }

    pub fn render(&self, h: &Header) -> String {
        let tolerances = if self.tolerances.is_empty() {
            "none".to_string()
        } else {
            self.tolerances
                .iter()
                .map(|(k, v)| format!("{k}={v:e}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut out = String::new();
        out.push_str(&format!("cdsplit {VERSION}\n"));
        out.push_str(&format!("report: {}\n", self.name));
        out.push_str(&format!("manifest: {} (sha256 {})\n", h.manifest_name, h.manifest_sha256));
        out.push_str(&format!("seed: {}\n", h.seed));
        out.push_str(&format!("grid: {}\n", self.grid));
        out.push_str(&format!("tolerances: {tolerances}\n"));
        out.push_str(&format!("caveat: {SAMPLING_CAVEAT}\n"));
        out.push('\n');
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out.push_str(&format!("status: {}\n", self.status()));
        out
    }

    /// Write `<name>.txt` and the attachments into `dir`.
    pub fn write(&self, h: &Header, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let txt = dir.join(format!("{}.txt", self.name));
        fs::write(&txt, self.render(h))?;
        written.push(txt);
        for (file, bytes) in &self.attachments {
            let p = dir.join(file);
            fs::write(&p, bytes)?;
            written.push(p);
        }
        Ok(written)
    }
}

pub fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|v| fmt_f64(*v)).collect();
    format!("({})", parts.join(", "))
}

pub fn coord_header(n: usize) -> Vec<String> {
    (0..n).map(|k| format!("q{k}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_has_every_field() {
        let mut r = Report::new("demo");
        r.tol("tol_cd", 1e-7);
        r.num("min", -0.5);
        r.check("sign", false);
        let h = Header {
            manifest_name: "m".into(),
            manifest_sha256: sha256_hex(b"abc"),
            seed: 42,
        };
        let text = r.render(&h);
        assert!(text.contains("ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"));
        assert!(text.contains("tolerances: tol_cd=1e-7"));
        assert!(text.contains("sampled, not proven"));
        assert!(text.ends_with("status: fail\n"));
        assert_eq!(text, r.render(&h));
    }
}
