use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use lhbp_core::sweep::SweepRow;
use serde::Serialize;

/// 17 significant digits, enough to round-trip any `f64`. Negative zero
/// prints as zero.
pub fn fmt_f(x: f64) -> String {
    let x = x + 0.0;
    format!("{x:.16e}")
}

pub const SWEEP_HEADER: [&str; 6] = [
    "parameter",
    "q0",
    "qtilde0",
    "regime",
    "q_converged",
    "qtilde_converged",
];

pub fn sweep_record(r: &SweepRow) -> Vec<String> {
    vec![
        fmt_f(r.parameter),
        fmt_f(r.q0),
        fmt_f(r.qtilde0),
        r.regime.clone(),
        r.q_converged.to_string(),
        r.qtilde_converged.to_string(),
    ]
}

pub struct Sink {
    out: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> io::Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Self { out })
    }

    pub fn csv<I>(&mut self, header: &[&str], rows: I) -> io::Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::Writer::from_writer(&mut self.out);
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()
    }

    pub fn json<T: Serialize>(&mut self, value: &T) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut self.out, value)?;
        writeln!(self.out)
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}
