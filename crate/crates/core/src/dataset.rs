//! Transmission-versus-pump-power measurements.
//!
//! CSV schema: `power_mW, theta, transmission[, sigma]` with `theta` one of
//! `0` or `pi2`. `sigma` is the absolute uncertainty on the transmission;
//! an empty cell means "not given".

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{format_float, Error, Result};

/// Relative phase between probe and pump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Theta {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "pi2")]
    HalfPi,
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theta::Zero => "0",
            Theta::HalfPi => "pi2",
        })
    }
}

impl FromStr for Theta {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "0" => Ok(Theta::Zero),
            "pi2" => Ok(Theta::HalfPi),
            other => Err(format!("expected `0` or `pi2`, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DataRow {
    /// Watts.
    pub pump_power: f64,
    pub theta: Theta,
    pub transmission: f64,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TransmissionDataset {
    pub rows: Vec<DataRow>,
}

const COLUMNS: [&str; 3] = ["power_mW", "theta", "transmission"];

impl TransmissionDataset {
    pub fn new(rows: Vec<DataRow>) -> Result<Self> {
        let ds = Self { rows };
        ds.validate()?;
        Ok(ds)
    }

    /// Row-level invariants plus the minimum size for a four-parameter fit.
    pub fn validate(&self) -> Result<()> {
        if self.rows.len() < 4 {
            return Err(Error::Data(format!(
                "need at least 4 rows for a 4-parameter fit, got {}",
                self.rows.len()
            )));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !(r.pump_power.is_finite() && r.pump_power >= 0.0) {
                return Err(Error::Data(format!("row {}: power must be >= 0", i + 1)));
            }
            if !(r.transmission.is_finite() && r.transmission > 0.0) {
                return Err(Error::Data(format!("row {}: transmission must be > 0", i + 1)));
            }
            if let Some(s) = r.sigma {
                if !(s.is_finite() && s > 0.0) {
                    return Err(Error::Data(format!("row {}: sigma must be > 0", i + 1)));
                }
            }
        }
        Ok(())
    }

    pub fn has_both_thetas(&self) -> bool {
        let zero = self.rows.iter().any(|r| r.theta == Theta::Zero);
        let half = self.rows.iter().any(|r| r.theta == Theta::HalfPi);
        zero && half
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(file, &path.display().to_string())
    }

    /// Parses CSV; errors name the source, the 1-based line and the column.
    pub fn from_reader<R: Read>(reader: R, source_name: &str) -> Result<Self> {
        let parse_err = |row: usize, column: &str, message: String| Error::Parse {
            source_name: source_name.to_string(),
            row,
            column: column.to_string(),
            message,
        };
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| parse_err(1, "", e.to_string()))?
            .clone();
        if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
            return Err(Error::Data(format!("{source_name}: empty file")));
        }
        let find = |name: &str| headers.iter().position(|h| h == name);
        let mut idx = [0usize; 3];
        for (slot, name) in idx.iter_mut().zip(COLUMNS) {
            *slot = find(name).ok_or_else(|| parse_err(1, name, "missing column".into()))?;
        }
        let sigma_idx = find("sigma");

        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| parse_err(line, "", e.to_string()))?;
            let field = |col: usize, name: &str| {
                rec.get(col)
                    .ok_or_else(|| parse_err(line, name, "missing value".into()))
            };
            let number = |col: usize, name: &str| -> Result<f64> {
                let text = field(col, name)?;
                text.parse::<f64>()
                    .map_err(|_| parse_err(line, name, format!("not a number: `{text}`")))
            };
            let power_mw = number(idx[0], "power_mW")?;
            if !(power_mw.is_finite() && power_mw >= 0.0) {
                return Err(parse_err(line, "power_mW", format!("must be >= 0, got {power_mw}")));
            }
            let theta = field(idx[1], "theta")?
                .parse::<Theta>()
                .map_err(|m| parse_err(line, "theta", m))?;
            let transmission = number(idx[2], "transmission")?;
            if !(transmission.is_finite() && transmission > 0.0) {
                return Err(parse_err(line, "transmission", format!("must be > 0, got {transmission}")));
            }
            let sigma = match sigma_idx {
                Some(col) if !field(col, "sigma")?.is_empty() => {
                    let s = number(col, "sigma")?;
                    if !(s.is_finite() && s > 0.0) {
                        return Err(parse_err(line, "sigma", format!("must be > 0, got {s}")));
                    }
                    Some(s)
                }
                _ => None,
            };
            rows.push(DataRow {
                pump_power: power_mw * 1e-3,
                theta,
                transmission,
                sigma,
            });
        }
        if rows.is_empty() {
            return Err(Error::Data(format!("{source_name}: no data rows")));
        }
        Ok(Self { rows })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Data(e.to_string());
        let with_sigma = self.rows.iter().any(|r| r.sigma.is_some());
        if with_sigma {
            w.write_record(["power_mW", "theta", "transmission", "sigma"]).map_err(io)?;
        } else {
            w.write_record(COLUMNS).map_err(io)?;
        }
        for r in &self.rows {
            let mut rec = vec![
                format_float(r.pump_power * 1e3),
                r.theta.to_string(),
                format_float(r.transmission),
            ];
            if with_sigma {
                rec.push(r.sigma.map(format_float).unwrap_or_default());
            }
            w.write_record(&rec).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<TransmissionDataset> {
        TransmissionDataset::from_reader(text.as_bytes(), "test.csv")
    }

    #[test]
    fn parses_rows_and_converts_power() {
        let ds = parse("power_mW,theta,transmission,sigma\n1.5,0,0.2,0.01\n10,pi2,0.5,\n").unwrap();
        assert_eq!(ds.rows.len(), 2);
        assert_eq!(ds.rows[0].pump_power, 1.5e-3);
        assert_eq!(ds.rows[0].sigma, Some(0.01));
        assert_eq!(ds.rows[1].theta, Theta::HalfPi);
        assert_eq!(ds.rows[1].sigma, None);
    }

    #[test]
    fn column_order_is_free() {
        let ds = parse("theta,transmission,power_mW\n0,0.3,2\n").unwrap();
        assert_eq!(ds.rows[0].pump_power, 2e-3);
    }

    #[test]
    fn errors_name_row_and_column() {
        let err = parse("power_mW,transmission\n1,0.2\n").unwrap_err();
        assert!(matches!(&err, Error::Parse { column, .. } if column == "theta"), "{err}");
        let err = parse("power_mW,theta,transmission\n1,0,0.2\n2,pi,0.3\n").unwrap_err();
        assert!(matches!(&err, Error::Parse { row: 3, column, .. } if column == "theta"), "{err}");
        let err = parse("power_mW,theta,transmission\n1,0,abc\n").unwrap_err();
        assert!(err.to_string().contains("transmission"));
        let err = parse("power_mW,theta,transmission\n-1,0,0.2\n").unwrap_err();
        assert!(err.to_string().contains("power_mW"));
        let err = parse("power_mW,theta,transmission\n1,0,0\n").unwrap_err();
        assert!(err.to_string().contains("transmission"));
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(parse("").is_err());
        assert!(parse("power_mW,theta,transmission\n").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let ds = parse("power_mW,theta,transmission,sigma\n0.3,0,0.05,0.001\n100,pi2,0.7,0.002\n").unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        for (a, b) in back.rows.iter().zip(&ds.rows) {
            assert!((a.pump_power - b.pump_power).abs() <= 1e-15 * b.pump_power);
            assert_eq!((a.theta, a.transmission, a.sigma), (b.theta, b.transmission, b.sigma));
        }
    }

    #[test]
    fn validation() {
        let row = DataRow {
            pump_power: 1e-3,
            theta: Theta::Zero,
            transmission: 0.1,
            sigma: None,
        };
        assert!(TransmissionDataset::new(vec![row; 3]).is_err());
        let ds = TransmissionDataset::new(vec![row; 4]).unwrap();
        assert!(!ds.has_both_thetas());
    }
}
