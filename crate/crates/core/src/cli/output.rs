//! CSV tables. Reals are written with 17 significant digits so that values
//! round-trip exactly.

use std::path::Path;

use crate::dressed::DressedBasis;
use crate::error::{Error, Result};
use crate::lindblad::DensityMatrix;
use crate::model::{Level, N_LEVELS};
use crate::solver::Trajectory;
use crate::sweep::SweepTable;

pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn from_sweep(table: &SweepTable) -> Self {
        let mut header = vec!["axis".to_string()];
        header.extend((1..=N_LEVELS).map(|k| format!("rho{k}{k}")));
        header.extend((0..N_LEVELS).map(|k| format!("p{k}")));
        header.extend((0..N_LEVELS).map(|k| format!("eps{k}")));
        header.extend(["residual", "gap", "dominant_pair"].map(String::from));

        let rows = table
            .rows
            .iter()
            .map(|r| {
                let mut rec = vec![fmt_real(r.axis_value)];
                rec.extend(r.populations.iter().map(|&x| fmt_real(x)));
                rec.extend(r.dressed_populations.iter().map(|&x| fmt_real(x)));
                rec.extend(r.eigenvalues.iter().map(|&x| fmt_real(x)));
                rec.push(fmt_real(r.residual));
                rec.push(fmt_real(r.gap));
                rec.push(r.dominant.label());
                rec
            })
            .collect();
        Table { header, rows }
    }

    /// An empty trajectory yields a header-only table.
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let observables = traj.observables();
        let mut header = vec!["t".to_string()];
        header.extend(observables.iter().map(|(name, _)| name.clone()));
        if traj.tracking_error.is_some() {
            header.push("tracking_error".into());
        }
        let rows = (0..traj.len())
            .map(|i| {
                let mut rec = vec![fmt_real(traj.times[i])];
                rec.extend(observables.iter().map(|(_, series)| fmt_real(series[i])));
                if let Some(te) = &traj.tracking_error {
                    rec.push(fmt_real(te[i]));
                }
                rec
            })
            .collect();
        Table { header, rows }
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        let header = ["row", "col", "re", "im"].map(String::from).to_vec();
        let mut rows = Vec::with_capacity(N_LEVELS * N_LEVELS);
        for r in Level::ALL {
            for c in Level::ALL {
                let z = rho.element(r, c);
                rows.push(vec![
                    r.get().to_string(),
                    c.get().to_string(),
                    fmt_real(z.re),
                    fmt_real(z.im),
                ]);
            }
        }
        Table { header, rows }
    }

    pub fn from_dressed(basis: &DressedBasis) -> Self {
        let mut header = vec!["label".to_string(), "eps".to_string()];
        for k in 1..=N_LEVELS {
            header.push(format!("u{k}_re"));
            header.push(format!("u{k}_im"));
        }
        let rows = (0..N_LEVELS)
            .map(|a| {
                let mut rec = vec![format!("e{a}"), fmt_real(basis.eigenvalues[a])];
                for level in Level::ALL {
                    let z = basis.amplitude(a, level);
                    rec.push(fmt_real(z.re));
                    rec.push(fmt_real(z.im));
                }
                rec
            })
            .collect();
        Table { header, rows }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parses one column as reals.
    pub fn real_column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column(name)?;
        self.rows.iter().map(|r| r[i].parse().ok()).collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let io = |e: csv::Error| csv_error(path, e);
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let io = |e: csv::Error| csv_error(path, e);
        let mut r = csv::Reader::from_path(path).map_err(io)?;
        let header = r.headers().map_err(io)?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
            .collect::<std::result::Result<_, _>>()
            .map_err(io)?;
        Ok(Table { header, rows })
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{other:?}")),
    };
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
        }
        assert!(fmt_real(f64::NAN).parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn density_table_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rho.csv");
        let t = Table::from_density(&DensityMatrix::maximally_mixed());
        t.write(&path).unwrap();
        let back = Table::read(&path).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.rows.len(), 25);
        assert_eq!(back.real_column("re").unwrap()[0], 0.2);
    }

    #[test]
    fn missing_directory_is_io_error() {
        let t = Table::from_density(&DensityMatrix::maximally_mixed());
        let err = t.write(Path::new("/nonexistent/dir/out.csv")).unwrap_err();
        assert_eq!(err.exit_code(), 11);
    }
}
