//! Point I/O: `t,x` input rows, embedded-image output rows.

use std::io::{Read, Write};

use crate::embed::{CylinderEvent, MinkowskiEvent};
use crate::error::{Error, Result};
use crate::nullflow::Event;

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn read_points<R: Read>(input: R) -> Result<Vec<Event>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "t" || &headers[1] != "x" {
        return Err(Error::InvalidSpec(format!(
            "points file must start with header 't,x', found '{}'",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64> {
            let raw = rec.get(i).unwrap_or("");
            raw.parse::<f64>().map_err(|_| {
                Error::InvalidSpec(format!("row {}: cannot parse '{raw}' as a number", row + 1))
            })
        };
        out.push(Event::new(field(0)?, field(1)?));
    }
    Ok(out)
}

/// One output row: the source event and either its image or an error.
pub enum ImageRow<T> {
    Ok(Event, T),
    Failed(Event, String),
}

pub trait CsvImage {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

impl CsvImage for MinkowskiEvent {
    const HEADER: &'static [&'static str] = &["tau", "X"];
    fn fields(&self) -> Vec<String> {
        vec![fmt_f64(self.tau), fmt_f64(self.x)]
    }
}

impl CsvImage for CylinderEvent {
    const HEADER: &'static [&'static str] = &["tau", "theta", "cover_theta"];
    fn fields(&self) -> Vec<String> {
        vec![fmt_f64(self.tau), fmt_f64(self.theta), fmt_f64(self.cover_theta)]
    }
}

/// Write `t,x,<image columns>`; an `error` column is appended only when some
/// row failed.
pub fn write_images<W: Write, T: CsvImage>(out: W, rows: &[ImageRow<T>]) -> Result<()> {
    let any_failed = rows.iter().any(|r| matches!(r, ImageRow::Failed(..)));
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = vec!["t", "x"];
    header.extend_from_slice(T::HEADER);
    if any_failed {
        header.push("error");
    }
    w.write_record(&header)?;
    for row in rows {
        let mut rec = Vec::with_capacity(header.len());
        match row {
            ImageRow::Ok(p, img) => {
                rec.push(fmt_f64(p.t));
                rec.push(fmt_f64(p.x));
                rec.extend(img.fields());
                if any_failed {
                    rec.push(String::new());
                }
            }
            ImageRow::Failed(p, msg) => {
                rec.push(fmt_f64(p.t));
                rec.push(fmt_f64(p.x));
                rec.extend(T::HEADER.iter().map(|_| String::new()));
                rec.push(msg.clone());
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
