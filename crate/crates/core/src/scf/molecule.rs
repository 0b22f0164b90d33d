use super::ScfError;

/// Bohr per ångström.
pub const ANGSTROM_TO_BOHR: f64 = 1.8897261246;

const ELEMENTS: [&str; 18] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar",
];

/// Nuclear charge of an element symbol (case-insensitive).
pub fn atomic_number(symbol: &str) -> Option<u32> {
    ELEMENTS
        .iter()
        .position(|e| e.eq_ignore_ascii_case(symbol))
        .map(|i| i as u32 + 1)
}

pub fn element_symbol(z: u32) -> &'static str {
    ELEMENTS.get(z as usize - 1).copied().unwrap_or("X")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub z: u32,
    /// position in bohr
    pub position: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthUnit {
    Angstrom,
    Bohr,
}

impl LengthUnit {
    pub fn to_bohr(self) -> f64 {
        match self {
            LengthUnit::Angstrom => ANGSTROM_TO_BOHR,
            LengthUnit::Bohr => 1.0,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "angstrom" | "ang" | "a" => Some(LengthUnit::Angstrom),
            "bohr" | "au" | "a.u." => Some(LengthUnit::Bohr),
            _ => None,
        }
    }
}

/// Closed-shell molecule with point nuclei.
#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    pub atoms: Vec<Atom>,
    pub charge: i32,
}

impl Molecule {
    pub fn new(atoms: Vec<Atom>, charge: i32) -> Result<Self, ScfError> {
        let mol = Self { atoms, charge };
        mol.validate()?;
        Ok(mol)
    }

    /// Atoms given as `(Z, position in bohr)`.
    pub fn from_atoms(atoms: &[(u32, [f64; 3])]) -> Result<Self, ScfError> {
        Self::new(
            atoms.iter().map(|&(z, position)| Atom { z, position }).collect(),
            0,
        )
    }

    /// Diatomic `Z₁ Z₂` on the z axis, centred at the origin.
    pub fn diatomic(z1: u32, z2: u32, distance: f64) -> Result<Self, ScfError> {
        Self::from_atoms(&[(z1, [0.0, 0.0, -distance / 2.0]), (z2, [0.0, 0.0, distance / 2.0])])
    }

    fn validate(&self) -> Result<(), ScfError> {
        if self.atoms.is_empty() {
            return Err(ScfError::InvalidMolecule("no atoms".into()));
        }
        if let Some(a) = self.atoms.iter().find(|a| a.z == 0) {
            return Err(ScfError::InvalidMolecule(format!("nuclear charge 0 at {:?}", a.position)));
        }
        let total: i64 = self.atoms.iter().map(|a| a.z as i64).sum::<i64>() - self.charge as i64;
        if total <= 0 {
            return Err(ScfError::InvalidMolecule(format!("{total} electrons")));
        }
        Ok(())
    }

    pub fn num_electrons(&self) -> usize {
        (self.atoms.iter().map(|a| a.z as i64).sum::<i64>() - self.charge as i64) as usize
    }

    pub fn is_closed_shell(&self) -> bool {
        self.num_electrons() % 2 == 0
    }

    /// `Σ_{A<B} Z_A Z_B / |R_A − R_B|` for point charges.
    pub fn nuclear_repulsion(&self) -> f64 {
        let mut e = 0.0;
        for (i, a) in self.atoms.iter().enumerate() {
            for b in &self.atoms[i + 1..] {
                e += (a.z * b.z) as f64 / distance(&a.position, &b.position);
            }
        }
        e
    }

    /// Every atom must lie inside `[−L+5, L−5]³`.
    pub fn check_in_box(&self, half_width: f64) -> Result<(), ScfError> {
        let limit = half_width - 5.0;
        for a in &self.atoms {
            if a.position.iter().any(|x| x.abs() > limit) {
                return Err(ScfError::AtomOutsideBox {
                    position: a.position,
                    limit,
                });
            }
        }
        Ok(())
    }

    /// Parses XYZ text. An optional atom-count line and comment line may
    /// precede the coordinates; a `units=angstrom|bohr` token on the comment
    /// line selects the length unit (default ångström).
    pub fn from_xyz(text: &str) -> Result<Self, ScfError> {
        Self::from_xyz_with_units(text, None)
    }

    /// Like [`from_xyz`](Self::from_xyz); `units` overrides the header.
    pub fn from_xyz_with_units(text: &str, units: Option<LengthUnit>) -> Result<Self, ScfError> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .collect();
        let mut idx = 0;
        let mut header_units = None;
        let mut charge = 0;
        // skip leading blank lines
        while idx < lines.len() && lines[idx].1.is_empty() {
            idx += 1;
        }
        let mut expected = None;
        if idx < lines.len() && lines[idx].1.parse::<usize>().is_ok() {
            expected = lines[idx].1.parse::<usize>().ok();
            idx += 1;
            if idx < lines.len() {
                let (line_no, comment) = lines[idx];
                parse_header(comment, line_no, &mut header_units, &mut charge)?;
                idx += 1;
            }
        } else if idx < lines.len() && lines[idx].1.contains('=') {
            let (line_no, comment) = lines[idx];
            parse_header(comment, line_no, &mut header_units, &mut charge)?;
            idx += 1;
        }
        let unit = units.or(header_units).unwrap_or(LengthUnit::Angstrom);
        let scale = unit.to_bohr();
        let mut atoms = Vec::new();
        for &(line_no, line) in &lines[idx..] {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 4 {
                return Err(ScfError::Parse {
                    line: line_no,
                    message: format!("expected `symbol x y z`, got `{line}`"),
                });
            }
            let z = atomic_number(fields[0]).ok_or_else(|| ScfError::Parse {
                line: line_no,
                message: format!("unknown element `{}`", fields[0]),
            })?;
            let mut position = [0.0; 3];
            for (q, f) in fields[1..4].iter().enumerate() {
                position[q] = f.parse::<f64>().map_err(|_| ScfError::Parse {
                    line: line_no,
                    message: format!("invalid coordinate `{f}`"),
                })? * scale;
            }
            atoms.push(Atom { z, position });
        }
        if let Some(n) = expected {
            if n != atoms.len() {
                return Err(ScfError::Parse {
                    line: 1,
                    message: format!("header announces {n} atoms, found {}", atoms.len()),
                });
            }
        }
        Self::new(atoms, charge)
    }

    /// XYZ text in bohr (`units=bohr` header).
    pub fn to_xyz(&self) -> String {
        let mut out = format!("{}\nunits=bohr charge={}\n", self.atoms.len(), self.charge);
        for a in &self.atoms {
            out.push_str(&format!(
                "{} {:.17e} {:.17e} {:.17e}\n",
                element_symbol(a.z),
                a.position[0],
                a.position[1],
                a.position[2]
            ));
        }
        out
    }
}

fn parse_header(comment: &str, line: usize, units: &mut Option<LengthUnit>, charge: &mut i32) -> Result<(), ScfError> {
    for token in comment.split_whitespace() {
        if let Some((key, value)) = token.split_once('=') {
            match key.to_ascii_lowercase().as_str() {
                "units" | "unit" => {
                    *units = Some(LengthUnit::parse(value).ok_or_else(|| ScfError::Parse {
                        line,
                        message: format!("unknown unit `{value}`"),
                    })?)
                }
                "charge" => {
                    *charge = value.parse().map_err(|_| ScfError::Parse {
                        line,
                        message: format!("invalid charge `{value}`"),
                    })?
                }
                _ => {}
            }
        }
    }
    Ok(())
}

pub(crate) fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}
