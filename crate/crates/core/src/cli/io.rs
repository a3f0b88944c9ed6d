//! Spectrum and table files: comma-separated, header row, LF endings, 17
//! significant digits.

use std::io::Write;
use std::path::Path;

use crate::lineshape::Spectrum;
use crate::simulation::{BoundaryResult, SweepResult};

use super::CliError;

/// Shortest rows a spectrum file may have.
pub const MIN_ROWS: usize = 5;

/// 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// Parses a `delta,value[,sigma]` table. Rows are sorted by delta; repeated
/// detunings are rejected.
pub fn parse_spectrum(text: &str) -> Result<Spectrum, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());

    let headers = reader.headers().map_err(|e| CliError::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let names: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    let with_sigma = match names.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["delta", "value"] => false,
        ["delta", "value", "sigma"] => true,
        _ => {
            return Err(CliError::Parse {
                line: 1,
                message: format!("expected header delta,value[,sigma], got {}", names.join(",")),
            })
        }
    };

    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |i: usize, name: &str| -> Result<f64, CliError> {
            let raw = record.get(i).ok_or_else(|| CliError::Parse {
                line,
                message: format!("missing {name} column"),
            })?;
            let v: f64 = raw.parse().map_err(|_| CliError::Parse {
                line,
                message: format!("cannot parse {name} value {raw:?}"),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(CliError::Parse {
                    line,
                    message: format!("non-finite {name}"),
                })
            }
        };
        let delta = field(0, "delta")?;
        let value = field(1, "value")?;
        let sigma = if with_sigma { field(2, "sigma")? } else { 0.0 };
        if sigma < 0.0 {
            return Err(CliError::Parse {
                line,
                message: "sigma must be >= 0".into(),
            });
        }
        rows.push((delta, value, sigma));
    }

    if rows.len() < MIN_ROWS {
        return Err(CliError::TooShort {
            rows: rows.len(),
            min: MIN_ROWS,
        });
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(CliError::DuplicateDelta(w[0].0));
    }

    let deltas = rows.iter().map(|r| r.0).collect();
    let values = rows.iter().map(|r| r.1).collect();
    let mut spectrum = Spectrum::new(deltas, values)?;
    if with_sigma {
        spectrum = spectrum.with_sigma(rows.iter().map(|r| r.2).collect())?;
    }
    Ok(spectrum)
}

pub fn read_spectrum(path: &Path) -> Result<Spectrum, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut spectrum = parse_spectrum(&text)?;
    spectrum.meta.insert("source".into(), path.display().to_string());
    Ok(spectrum)
}

pub fn spectrum_to_csv(s: &Spectrum) -> String {
    let mut out = String::new();
    match &s.sigma_exp {
        Some(sigma) => {
            out.push_str("delta,value,sigma\n");
            for ((d, v), e) in s.deltas.iter().zip(&s.values).zip(sigma) {
                out.push_str(&format!("{},{},{}\n", fmt_num(*d), fmt_num(*v), fmt_num(*e)));
            }
        }
        None => {
            out.push_str("delta,value\n");
            for (d, v) in s.deltas.iter().zip(&s.values) {
                out.push_str(&format!("{},{}\n", fmt_num(*d), fmt_num(*v)));
            }
        }
    }
    out
}

pub fn sweep_to_csv(r: &SweepResult) -> String {
    let mut out = String::from("omega,per_point_eit,per_point_ats,akaike_eit,akaike_ats,failures\n");
    for i in 0..r.axis.len() {
        let [pe, pa] = r.per_point_weights[i];
        let [ae, aa] = r.akaike_weights[i];
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_num(r.axis[i]),
            fmt_num(pe),
            fmt_num(pa),
            fmt_num(ae),
            fmt_num(aa),
            r.failures[i]
        ));
    }
    out
}

pub fn boundary_to_csv(r: &BoundaryResult) -> String {
    let mut out = String::from("gamma_bc,omega_aic,depth_at_crossover\n");
    for i in 0..r.gamma_bc.len() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_num(r.gamma_bc[i]),
            fmt_opt(r.omega_aic[i]),
            fmt_opt(r.depth_at_crossover[i])
        ));
    }
    out
}

/// Writes `contents` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TABLE: &str = "delta,value,sigma\n0.0,1.0,0.1\n1.0,0.5,0.1\n-1.0,0.5,0.1\n2.0,0.2,0.05\n-2.0,0.2,0.05\n";

    #[test]
    fn three_columns_populate_sigma() {
        let s = parse_spectrum(TABLE).unwrap();
        assert_eq!(s.deltas, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(s.values, vec![0.2, 0.5, 1.0, 0.5, 0.2]);
        assert_eq!(s.sigma_exp, Some(vec![0.05, 0.1, 0.1, 0.1, 0.05]));
    }

    #[test]
    fn unsorted_rows_match_sorted_input() {
        let sorted = "delta,value\n-2,0.2\n-1,0.5\n0,1\n1,0.5\n2,0.2\n";
        let shuffled = "delta,value\n1,0.5\n-2,0.2\n0,1\n2,0.2\n-1,0.5\n";
        assert_eq!(parse_spectrum(sorted).unwrap(), parse_spectrum(shuffled).unwrap());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "delta,value\n0,1\n1,0.5\n2,oops\n3,0.1\n4,0.05\n";
        match parse_spectrum(bad) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_spectrum("delta,value\n0,1\n0,2\n1,1\n2,1\n3,1\n"),
            Err(CliError::DuplicateDelta(_))
        ));
        assert!(matches!(
            parse_spectrum("delta,value\n0,1\n1,2\n"),
            Err(CliError::TooShort { rows: 2, .. })
        ));
        assert!(matches!(parse_spectrum("x,y\n0,1\n"), Err(CliError::Parse { line: 1, .. })));
    }

    proptest! {
        #[test]
        fn export_then_ingest_is_lossless(values in prop::collection::vec(-1e6..1e6f64, 5..40), step in 1e-3..10.0f64) {
            let deltas: Vec<f64> = (0..values.len()).map(|i| -3.0 + i as f64 * step).collect();
            let s = Spectrum::new(deltas, values).unwrap();
            let back = parse_spectrum(&spectrum_to_csv(&s)).unwrap();
            prop_assert_eq!(back.deltas, s.deltas);
            prop_assert_eq!(back.values, s.values);
        }
    }
}
