//! Canonical text formats for configurations and trajectories, plus a
//! GraphML import shim.
//!
//! # Snapshot format
//!
//! ```text
//! gnakit-snapshot 1
//! directed 1
//! time 0
//! next-id 3
//! alphabet 0 1
//! node 0 1
//! node 2 0 class=actor realm=air
//! link 0 2 0 1
//! end
//! ```
//!
//! One record per line, whitespace separated. `node <id> <label>
//! [key=value...]`; `link <src> <dst> <label> <weight>`. The `alphabet` line
//! is optional (absent means unrestricted). Links are directed arcs; an
//! undirected snapshot (`directed 0`) lists both arcs of every edge.
//! Nodes are written in ascending id order, links in ascending
//! `(src, dst, label, weight)` order and attributes by key, so two
//! snapshots are semantically equal exactly when their bytes are equal.
//! Tokens escape whitespace, `%`, `=` and `#` as `%XX`; the empty token is
//! `-` and a literal `-` is `%2D`. Lines starting with `#` are comments.
//!
//! # Trajectory format
//!
//! ```text
//! gnakit-trajectory 1
//! meta model ba
//! quiescent 0
//! initial
//! <snapshot>
//! event 0
//! old
//! <sub>
//! new
//! <sub>
//! corr 0>0 1>1
//! final
//! <snapshot>
//! ```
//!
//! A sub block is `sub <id-base>`, then `seeds ...`, `node <id> <state>`,
//! `link <src> <dst> <state>`, `bridge <inner> <outer> in|out <state>`, and
//! `end`. `corr` lists the node correspondence of the event.

mod graphml;
mod snapshot;
mod trajectory;

use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::gna::GnaError;

pub use graphml::GraphmlImporter;
pub use snapshot::{config_to_text, parse_config, LinkRecord, NodeRecord, Snapshot, SNAPSHOT_VERSION};
pub use trajectory::{parse_trajectory, trajectory_to_text, TRAJECTORY_VERSION};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("graphml: {0}")]
    Xml(String),
    #[error(transparent)]
    Gna(#[from] GnaError),
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
}

pub(crate) fn escape(s: &str) -> String {
    if s.is_empty() {
        return "-".into();
    }
    if s == "-" {
        return "%2D".into();
    }
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '%' | '=' | '#' => out.push_str(&format!("%{:02X}", c as u32)),
            c if c.is_whitespace() && (c as u32) < 0x100 => out.push_str(&format!("%{:02X}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

pub(crate) fn unescape(s: &str) -> Option<String> {
    if s == "-" {
        return Some(String::new());
    }
    let mut out = String::with_capacity(s.len());
    let mut it = s.chars();
    while let Some(c) = it.next() {
        if c == '%' {
            let hex: String = it.by_ref().take(2).collect();
            let v = u32::from_str_radix(&hex, 16).ok().filter(|_| hex.len() == 2)?;
            out.push(char::from_u32(v)?);
        } else {
            out.push(c);
        }
    }
    Some(out)
}

/// A whitespace-separated token with its 1-based column.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Token<'a> {
    pub text: &'a str,
    pub col: usize,
}

/// Line-oriented reader that skips blank lines and `#` comments and reports
/// positions.
pub(crate) struct Lines<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    pub line: usize,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str) -> Self {
        Lines { lines: text.lines().enumerate().peekable(), line: 0 }
    }

    fn skip_blank(&mut self) {
        while let Some((_, l)) = self.lines.peek() {
            let t = l.trim_start();
            if t.is_empty() || t.starts_with('#') {
                self.lines.next();
            } else {
                break;
            }
        }
    }

    /// Next non-blank line split into tokens.
    pub fn next_tokens(&mut self) -> Option<Vec<Token<'a>>> {
        self.skip_blank();
        let (i, l) = self.lines.next()?;
        self.line = i + 1;
        Some(tokens(l))
    }

    /// First token of the next non-blank line without consuming it.
    pub fn peek_keyword(&mut self) -> Option<&'a str> {
        self.skip_blank();
        self.lines.peek().and_then(|(_, l)| l.split_whitespace().next())
    }

    pub fn err(&self, col: usize, msg: impl Into<String>) -> IoError {
        IoError::Parse { line: self.line, col, msg: msg.into() }
    }

    pub fn eof(&self, what: &str) -> IoError {
        IoError::Parse { line: self.line + 1, col: 1, msg: format!("unexpected end of input, expected {what}") }
    }

    /// Reads a line that must start with `kw`, returning its arguments.
    pub fn expect(&mut self, kw: &str) -> Result<(Vec<Token<'a>>, usize), IoError> {
        let toks = self.next_tokens().ok_or_else(|| self.eof(kw))?;
        if toks[0].text != kw {
            return Err(self.err(toks[0].col, format!("expected `{kw}`, found `{}`", toks[0].text)));
        }
        Ok((toks[1..].to_vec(), toks[0].col + kw.len()))
    }

    pub fn parse<T: std::str::FromStr>(&self, t: Token<'_>, what: &str) -> Result<T, IoError> {
        t.text.parse().map_err(|_| self.err(t.col, format!("invalid {what} `{}`", t.text)))
    }

    pub fn arity(&self, args: &[Token<'_>], n: usize, end_col: usize, what: &str) -> Result<(), IoError> {
        if args.len() < n {
            return Err(
                self.err(args.last().map_or(end_col, |t| t.col + t.text.len()), format!("{what}: missing field"))
            );
        }
        if args.len() > n {
            return Err(self.err(args[n].col, format!("{what}: unexpected field `{}`", args[n].text)));
        }
        Ok(())
    }
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(Token { text: &line[s..i], col: line[..s].chars().count() + 1 });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &line[s..], col: line[..s].chars().count() + 1 });
    }
    out
}

/// Writes `bytes` to `path` atomically: a sibling temporary file is written,
/// flushed and renamed over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let file_err = |source| IoError::File { path: path.display().to_string(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let mut f = std::fs::File::create(&tmp).map_err(file_err)?;
    f.write_all(bytes).map_err(file_err)?;
    f.sync_all().map_err(file_err)?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        file_err(e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escape_round_trip() {
        for s in ["", "-", "a b", "x=y", "100%", "#tag", "plain", "tab\there", "é"] {
            let e = escape(s);
            assert!(!e.contains(char::is_whitespace), "{e}");
            assert_eq!(unescape(&e).unwrap(), s);
        }
        assert!(unescape("%G1").is_none());
        assert!(unescape("%4").is_none());
    }

    #[test]
    fn token_columns() {
        let t = tokens("  node 12   x");
        assert_eq!(t.iter().map(|t| (t.text, t.col)).collect::<Vec<_>>(), [("node", 3), ("12", 8), ("x", 13)]);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("gnakit-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
        std::fs::remove_dir_all(&dir).unwrap();
        assert!(write_atomic(Path::new("/nonexistent-dir/x/y"), b"z").is_err());
    }
}
