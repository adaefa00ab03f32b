//! CSV emission: `#`-prefixed metadata lines, a header row, then decimal
//! values at 17 significant digits.

use freeprob_core::textio::fmt17;
use std::fmt::Write as _;

pub struct CsvDoc {
    buf: String,
}

impl CsvDoc {
    /// Starts a document with the standard metadata block. Every randomized
    /// experiment embeds (seed, n, N) plus a git-describe placeholder.
    pub fn new(seed: u64, n: Option<usize>, dim: Option<usize>) -> Self {
        let mut buf = String::new();
        let _ = writeln!(buf, "# seed = {seed}");
        if let Some(n) = n {
            let _ = writeln!(buf, "# n = {n}");
        }
        if let Some(dim) = dim {
            let _ = writeln!(buf, "# dim = {dim}");
        }
        let _ = writeln!(
            buf,
            "# build = freeprob {} (git describe: placeholder)",
            env!("CARGO_PKG_VERSION")
        );
        Self { buf }
    }

    pub fn meta(&mut self, key: &str, value: &str) {
        let _ = writeln!(self.buf, "# {key} = {value}");
    }

    pub fn header(&mut self, columns: &[&str]) {
        let _ = writeln!(self.buf, "{}", columns.join(","));
    }

    pub fn header_line(&mut self, line: &str) {
        let _ = writeln!(self.buf, "{line}");
    }

    /// One row of floats, formatted at 17 significant digits.
    pub fn row_f64(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| fmt17(v)).collect();
        let _ = writeln!(self.buf, "{}", cells.join(","));
    }

    /// One row of preformatted cells.
    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.buf, "{}", cells.join(","));
    }

    pub fn finish(self) -> String {
        self.buf
    }
}
