//! FCIDUMP text serialization.
//!
//! The header is a Fortran namelist (`&FCI NORB=…,NELEC=…,MS2=…, … &END`);
//! each following line is `value i j k l` with 1-based orbital indices:
//! two-electron lines carry the chemist integral `(ij|kl) = ⟨ik|jl⟩`,
//! `i j 0 0` lines carry `h_ij`, and `0 0 0 0` carries the constant energy.
//! Only symmetry-unique, non-zero entries are written.

use super::{IntegralTensors, SecondqError};
use nalgebra::DMatrix;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FcidumpHeader {
    pub norb: usize,
    pub nelec: usize,
    pub ms2: i64,
}

/// FCIDUMP text for `t` with `n_elec` electrons.
pub fn to_fcidump_string(t: &IntegralTensors, n_elec: usize) -> String {
    let n = t.n();
    let mut s = String::new();
    let _ = writeln!(s, " &FCI NORB={n},NELEC={n_elec},MS2=0,");
    let _ = writeln!(s, "  ORBSYM={}", "1,".repeat(n));
    let _ = writeln!(s, "  ISYM=1,");
    let _ = writeln!(s, " &END");
    let line = |s: &mut String, v: f64, i: usize, j: usize, k: usize, l: usize| {
        let _ = writeln!(s, "{v:>25.16E} {i:>4} {j:>4} {k:>4} {l:>4}");
    };
    for i in 0..n {
        for j in 0..=i {
            for k in 0..n {
                for l in 0..=k {
                    if i * (i + 1) / 2 + j < k * (k + 1) / 2 + l {
                        continue;
                    }
                    let v = t.g(i, k, j, l);
                    if v != 0.0 {
                        line(&mut s, v, i + 1, j + 1, k + 1, l + 1);
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let v = t.h()[(i, j)];
            if v != 0.0 {
                line(&mut s, v, i + 1, j + 1, 0, 0);
            }
        }
    }
    line(&mut s, t.e_const, 0, 0, 0, 0);
    s
}

pub fn write_fcidump(t: &IntegralTensors, n_elec: usize, path: impl AsRef<Path>) -> Result<(), SecondqError> {
    std::fs::write(path.as_ref(), to_fcidump_string(t, n_elec))
        .map_err(|e| SecondqError::Io(format!("{}: {e}", path.as_ref().display())))
}

pub fn read_fcidump(path: impl AsRef<Path>) -> Result<(IntegralTensors, FcidumpHeader), SecondqError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| SecondqError::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_fcidump(&text)
}

pub fn parse_fcidump(text: &str) -> Result<(IntegralTensors, FcidumpHeader), SecondqError> {
    let perr = |line: usize, message: String| SecondqError::Parse { line, message };
    let mut lines = text.lines().enumerate();
    let mut header = String::new();
    let mut closed = false;
    for (_, l) in lines.by_ref() {
        let trimmed = l.trim();
        header.push_str(trimmed);
        header.push(',');
        let upper = trimmed.to_ascii_uppercase();
        if upper.ends_with("&END") || upper == "/" || upper.ends_with('/') {
            closed = true;
            break;
        }
    }
    if !closed {
        return Err(perr(1, "namelist header is not terminated by &END".into()));
    }
    let field = |name: &str| -> Option<String> {
        let upper = header.to_ascii_uppercase();
        let pos = upper
            .match_indices(name)
            .find(|(p, _)| *p == 0 || !upper.as_bytes()[p - 1].is_ascii_alphanumeric())?
            .0;
        let rest = &header[pos + name.len()..];
        let rest = rest.trim_start().strip_prefix('=')?;
        let val: String = rest
            .trim_start()
            .chars()
            .take_while(|c| c.is_ascii_digit() || *c == '-' || *c == '+')
            .collect();
        Some(val)
    };
    let norb: usize = field("NORB")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| perr(1, "missing or invalid NORB".into()))?;
    let nelec: usize = field("NELEC")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| perr(1, "missing or invalid NELEC".into()))?;
    let ms2: i64 = field("MS2").and_then(|v| v.parse().ok()).unwrap_or(0);

    let mut h = DMatrix::zeros(norb, norb);
    let mut t = IntegralTensors::zeros(norb);
    let mut e_const = 0.0;
    for (lineno, l) in lines {
        let lineno = lineno + 1;
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.is_empty() {
            continue;
        }
        if parts.len() != 5 {
            return Err(perr(lineno, format!("expected 5 fields, found {}", parts.len())));
        }
        let v: f64 = parts[0]
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| perr(lineno, format!("invalid value '{}'", parts[0])))?;
        if !v.is_finite() {
            return Err(perr(lineno, "non-finite value".into()));
        }
        let mut idx = [0usize; 4];
        for (slot, p) in idx.iter_mut().zip(&parts[1..]) {
            *slot = p
                .parse()
                .map_err(|_| perr(lineno, format!("invalid index '{p}'")))?;
            if *slot > norb {
                return Err(perr(lineno, format!("index {slot} exceeds NORB={norb}")));
            }
        }
        match idx {
            [0, 0, 0, 0] => e_const = v,
            [i, j, 0, 0] if i > 0 && j > 0 => {
                h[(i - 1, j - 1)] = v;
                h[(j - 1, i - 1)] = v;
            }
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                // (ij|kl) = ⟨ik|jl⟩
                t.set_g_symmetric(i - 1, k - 1, j - 1, l - 1, v);
            }
            _ => return Err(perr(lineno, format!("invalid index pattern {idx:?}"))),
        }
    }
    *t.h_mut() = h;
    t.e_const = e_const;
    Ok((t, FcidumpHeader { norb, nelec, ms2 }))
}

#[cfg(test)]
mod tests {
    use super::super::integrals::tests::random_tensors;
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let t = random_tensors(4, 11);
        let text = to_fcidump_string(&t, 4);
        let (r, hdr) = parse_fcidump(&text).unwrap();
        assert_eq!(hdr, FcidumpHeader { norb: 4, nelec: 4, ms2: 0 });
        assert_eq!(r.h(), t.h());
        assert_eq!(r.g_data(), t.g_data());
        assert_eq!(r.e_const, t.e_const);
    }

    #[test]
    fn one_orbital_file_has_three_value_lines() {
        let mut t = IntegralTensors::zeros(1);
        t.h_mut()[(0, 0)] = -1.0;
        t.set_g(0, 0, 0, 0, 0.5);
        t.e_const = 0.1;
        let text = to_fcidump_string(&t, 2);
        let values: Vec<&str> = text.lines().skip_while(|l| !l.contains("&END")).skip(1).collect();
        assert_eq!(values.len(), 3);
        assert!(values[2].trim_end().ends_with("0    0    0    0"));
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let text = " &FCI NORB=1,NELEC=2,MS2=0,\n &END\n 0.5 1 1 1\n";
        match parse_fcidump(text) {
            Err(SecondqError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
