/// Box address in the dyadic refinement: level `n` and translation `l`,
/// with `0 ≤ l_q < 2^n`. Unused dimensions (for `d = 1`) stay zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeKey {
    pub level: u8,
    pub l: [u32; 3],
}

impl NodeKey {
    pub const ROOT: NodeKey = NodeKey { level: 0, l: [0; 3] };

    pub fn new(level: u8, l: [u32; 3]) -> Self {
        Self { level, l }
    }

    /// Child `c`; bit `d-1-q` of `c` selects the upper half along axis `q`.
    pub fn child(&self, c: usize, d: usize) -> NodeKey {
        let mut l = [0u32; 3];
        for q in 0..d {
            l[q] = 2 * self.l[q] + ((c >> (d - 1 - q)) & 1) as u32;
        }
        NodeKey { level: self.level + 1, l }
    }

    pub fn children(&self, d: usize) -> impl Iterator<Item = NodeKey> + '_ {
        (0..1usize << d).map(move |c| self.child(c, d))
    }

    pub fn parent(&self) -> Option<NodeKey> {
        if self.level == 0 {
            return None;
        }
        Some(NodeKey {
            level: self.level - 1,
            l: [self.l[0] / 2, self.l[1] / 2, self.l[2] / 2],
        })
    }

    /// Index of this key among its parent's children.
    pub fn child_index(&self, d: usize) -> usize {
        (0..d).fold(0, |acc, q| (acc << 1) | (self.l[q] & 1) as usize)
    }

    /// Neighbour shifted by `delta` at the same level, if inside the domain.
    pub fn shifted(&self, delta: [i64; 3], d: usize) -> Option<NodeKey> {
        let extent = 1i64 << self.level;
        let mut l = [0u32; 3];
        for q in 0..d {
            let v = self.l[q] as i64 + delta[q];
            if v < 0 || v >= extent {
                return None;
            }
            l[q] = v as u32;
        }
        Some(NodeKey { level: self.level, l })
    }

    /// True if `self` is `other` or one of its ancestors.
    pub fn contains(&self, other: &NodeKey) -> bool {
        if other.level < self.level {
            return false;
        }
        let shift = other.level - self.level;
        (0..3).all(|q| other.l[q] >> shift == self.l[q])
    }

    /// Ancestor at `level` (which must not exceed the key's own level).
    pub fn ancestor_at(&self, level: u8) -> NodeKey {
        let shift = self.level - level;
        NodeKey {
            level,
            l: [self.l[0] >> shift, self.l[1] >> shift, self.l[2] >> shift],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn children_follow_dyadic_rule() {
        let k = NodeKey::new(2, [1, 3, 0]);
        let kids: Vec<_> = k.children(3).collect();
        assert_eq!(kids.len(), 8);
        for (c, kid) in kids.iter().enumerate() {
            assert_eq!(kid.level, 3);
            assert_eq!(kid.parent().unwrap(), k);
            assert_eq!(kid.child_index(3), c);
            for q in 0..3 {
                assert!(kid.l[q] == 2 * k.l[q] || kid.l[q] == 2 * k.l[q] + 1);
            }
        }
        let two_d: Vec<_> = NodeKey::new(1, [1, 0, 0]).children(2).collect();
        assert_eq!(two_d.len(), 4);
    }

    #[test]
    fn containment() {
        let k = NodeKey::new(1, [1, 0, 1]);
        let deep = NodeKey::new(4, [9, 3, 12]);
        assert!(k.contains(&deep));
        assert_eq!(deep.ancestor_at(1), k);
        assert!(!deep.contains(&k));
    }
}
