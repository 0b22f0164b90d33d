//! Scans along one geometric coordinate with an incrementally written,
//! resumable `scan.csv`.

use crate::config::{RunConfig, ScanCoordinate};
use crate::pipeline::{run_point, ResultRecord};
use crate::CliError;
use mraqc::scf::{Atom, Molecule};
use std::collections::BTreeSet;
use std::fs::OpenOptions;
use std::path::Path;

pub const SCAN_HEADER: &str = "index,coordinate,value_bohr,label,energy,hf_energy,macro_energies,occupations,wall_time,status,completed";

impl ScanCoordinate {
    pub fn name(self) -> &'static str {
        match self {
            ScanCoordinate::BondLength => "bond_length",
            ScanCoordinate::H4Separation => "h4_separation",
        }
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn unit(v: [f64; 3]) -> Result<[f64; 3], CliError> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n < 1e-12 {
        return Err(CliError::Config("scan direction is undefined (coincident positions)".into()));
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

/// The reference geometry with the scanned coordinate set to `value` (bohr).
pub fn displaced(mol: &Molecule, coordinate: ScanCoordinate, value: f64) -> Result<Molecule, CliError> {
    let mut atoms: Vec<Atom> = mol.atoms.clone();
    match coordinate {
        ScanCoordinate::BondLength => {
            if atoms.len() != 2 {
                return Err(CliError::Config(format!("bond_length scans need 2 atoms, got {}", atoms.len())));
            }
            let (a, b) = (atoms[0].position, atoms[1].position);
            let d = unit(sub(b, a))?;
            let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0];
            for (atom, s) in atoms.iter_mut().zip([-0.5, 0.5]) {
                atom.position = [mid[0] + s * value * d[0], mid[1] + s * value * d[1], mid[2] + s * value * d[2]];
            }
        }
        ScanCoordinate::H4Separation => {
            if atoms.len() != 4 {
                return Err(CliError::Config(format!("h4_separation scans need 4 atoms, got {}", atoms.len())));
            }
            let centre = |i: usize, j: usize| {
                let (p, q) = (atoms[i].position, atoms[j].position);
                [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]
            };
            let (c1, c2) = (centre(0, 1), centre(2, 3));
            let d = unit(sub(c2, c1))?;
            let target = [c1[0] + value * d[0], c1[1] + value * d[1], c1[2] + value * d[2]];
            let shift = sub(target, c2);
            for atom in &mut atoms[2..] {
                for (x, s) in atom.position.iter_mut().zip(shift) {
                    *x += s;
                }
            }
        }
    }
    Molecule::new(atoms, mol.charge).map_err(|e| CliError::Config(e.to_string()))
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(";")
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Numerical(format!("scan.csv: {e}"))
}

/// Grid indices already marked completed in an existing `scan.csv`.
pub fn completed_indices(path: &Path) -> Result<BTreeSet<usize>, CliError> {
    let mut done = BTreeSet::new();
    if !path.exists() {
        return Ok(done);
    }
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    let header: Vec<String> = reader.headers().map_err(csv_error)?.iter().map(String::from).collect();
    if header.join(",") != SCAN_HEADER {
        return Err(CliError::Config(format!("{} has an unexpected header", path.display())));
    }
    for row in reader.records() {
        // a torn final line from an interrupted run is simply recomputed
        let Ok(row) = row else { continue };
        if row.get(header.len() - 1) == Some("1") {
            if let Some(i) = row.get(0).and_then(|v| v.parse().ok()) {
                done.insert(i);
            }
        }
    }
    Ok(done)
}

fn append_row(path: &Path, row: &[String]) -> Result<(), CliError> {
    let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if fresh {
        w.write_record(SCAN_HEADER.split(',')).map_err(csv_error)?;
    }
    w.write_record(row).map_err(csv_error)?;
    w.flush()?;
    w.get_ref().sync_all()?;
    Ok(())
}

/// Outcome of a scan: per-point results (`Err` entries for failed points)
/// and the indices skipped because they were already completed.
pub struct ScanOutcome {
    pub results: Vec<(usize, Result<ResultRecord, CliError>)>,
    pub skipped: Vec<usize>,
}

/// Runs every grid point not yet completed, appending one row per point.
/// Failures are recorded and the scan continues.
pub fn run_scan(cfg: &RunConfig, out_dir: &Path) -> Result<ScanOutcome, CliError> {
    let scan = cfg
        .scan
        .as_ref()
        .ok_or_else(|| CliError::Config("no scan section in the configuration".into()))?;
    let reference = cfg.molecule()?;
    let grid = cfg.grid_bohr()?;
    std::fs::create_dir_all(out_dir)?;
    let csv = out_dir.join("scan.csv");
    let done = completed_indices(&csv)?;
    let mut outcome = ScanOutcome {
        results: Vec::new(),
        skipped: Vec::new(),
    };
    for (i, &value) in grid.iter().enumerate() {
        if done.contains(&i) {
            log::info!("scan point {i} already completed; skipping");
            outcome.skipped.push(i);
            continue;
        }
        let mol = displaced(&reference, scan.coordinate, value)?;
        let name = scan.coordinate.name();
        log::info!("scan point {i}: {name} = {value} bohr");
        let res = run_point(cfg, &mol, &out_dir.join(format!("point_{i}"))).map(|mut r| {
            r.coordinate = Some((name.to_string(), value));
            r
        });
        let head = [i.to_string(), name.to_string(), format!("{value:.16e}")];
        let tail: Vec<String> = match &res {
            Ok(r) => vec![
                r.label.clone(),
                format!("{:.16e}", r.energy),
                format!("{:.16e}", r.hf_energy),
                join(&r.macro_energies),
                join(&r.occupations),
                format!("{:.3}", r.wall_time),
                "ok".into(),
            ],
            Err(e) => {
                log::error!("scan point {i} failed: {e}");
                let mut v = vec![String::new(); 6];
                v.push(format!("failed: {e}"));
                v
            }
        };
        let mut row: Vec<String> = head.into_iter().chain(tail).collect();
        row.push("1".into());
        append_row(&csv, &row)?;
        outcome.results.push((i, res));
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bond_length_keeps_the_midpoint() {
        let mol = Molecule::from_atoms(&[(1, [0.0, 0.0, 1.0]), (1, [0.0, 0.0, 2.4])]).unwrap();
        let m = displaced(&mol, ScanCoordinate::BondLength, 3.0).unwrap();
        assert!((m.atoms[0].position[2] - 0.2).abs() < 1e-12);
        assert!((m.atoms[1].position[2] - 3.2).abs() < 1e-12);
    }

    #[test]
    fn h4_separation_moves_the_second_pair() {
        let mol = Molecule::from_atoms(&[
            (1, [-0.7, 0.0, 0.0]),
            (1, [0.7, 0.0, 0.0]),
            (1, [-0.7, 2.0, 0.0]),
            (1, [0.7, 2.0, 0.0]),
        ])
        .unwrap();
        let m = displaced(&mol, ScanCoordinate::H4Separation, 3.5).unwrap();
        assert_eq!(m.atoms[0].position, mol.atoms[0].position);
        assert!((m.atoms[2].position[1] - 3.5).abs() < 1e-12);
        assert!((m.atoms[3].position[0] - 0.7).abs() < 1e-12);
        assert!(displaced(&mol, ScanCoordinate::BondLength, 1.0).is_err());
    }

    #[test]
    fn completed_rows_are_found() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("scan.csv");
        let row = |s: &str| s.split('|').map(String::from).collect::<Vec<_>>();
        append_row(&p, &row("0|bond_length|1.0|FCI/PNO(2,4)|1|1|1|1|1|ok|1")).unwrap();
        append_row(&p, &row("1|bond_length|2.0|FCI/PNO(2,4)|1|1|1|1|1|ok|0")).unwrap();
        append_row(&p, &row("2|bond_length|3.0|||||||failed: a, b|1")).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().next(), Some(SCAN_HEADER));
        assert_eq!(completed_indices(&p).unwrap().into_iter().collect::<Vec<_>>(), vec![0, 2]);
        let cols = SCAN_HEADER.split(',').count();
        let mut reader = csv::Reader::from_path(&p).unwrap();
        for rec in reader.records() {
            assert_eq!(rec.unwrap().len(), cols);
        }
    }
}
