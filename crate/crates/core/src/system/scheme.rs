use serde::{Deserialize, Serialize};

use crate::linalg::{zeros, CMat, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Single,
    DexterSingle,
    DexterAll,
    Foerster,
}

/// Hilbert-space layout of an emitter chain.
///
/// Single and Dexter chains hold one electron on 3N levels; level `i ∈ {1,2,3}`
/// of site `l` (both zero-based sites) sits at index `3l + i − 1`. Förster
/// chains use the 4^N product space of per-site levels {0,1,2,3}, with site 0
/// as the most significant base-4 digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LevelScheme {
    pub kind: SchemeKind,
    pub n_sites: usize,
    pub dim: usize,
}

impl LevelScheme {
    pub fn new(kind: SchemeKind, n_sites: usize) -> Self {
        let n_sites = if kind == SchemeKind::Single { 1 } else { n_sites };
        let dim = match kind {
            SchemeKind::Foerster => 4usize.pow(n_sites as u32),
            _ => 3 * n_sites,
        };
        Self { kind, n_sites, dim }
    }

    pub fn is_product(&self) -> bool {
        self.kind == SchemeKind::Foerster
    }

    /// Lowest level label present on each site.
    pub fn min_level(&self) -> usize {
        if self.is_product() {
            0
        } else {
            1
        }
    }

    /// Global index of (site, level) for one-electron schemes.
    pub fn index(&self, site: usize, level: usize) -> Option<usize> {
        if self.is_product() || site >= self.n_sites || !(1..=3).contains(&level) {
            None
        } else {
            Some(3 * site + level - 1)
        }
    }

    /// Per-site levels of a product basis state.
    pub fn digits(&self, state: usize) -> Vec<usize> {
        let mut out = vec![0; self.n_sites];
        let mut s = state;
        for l in (0..self.n_sites).rev() {
            out[l] = s % 4;
            s /= 4;
        }
        out
    }

    pub fn product_index(&self, levels: &[usize]) -> usize {
        levels.iter().fold(0, |acc, &d| acc * 4 + d)
    }

    /// Level occupied by `site` in basis state `state`, if the site holds the
    /// state's electron (one-electron schemes) or always (product scheme).
    pub fn level_of(&self, state: usize, site: usize) -> Option<usize> {
        if self.is_product() {
            Some(self.digits(state)[site])
        } else if state / 3 == site {
            Some(state % 3 + 1)
        } else {
            None
        }
    }

    /// Site-local transition |a⟩⟨b| on `site`, embedded in the full space.
    pub fn site_operator(&self, site: usize, a: usize, b: usize) -> CMat {
        let mut m = zeros(self.dim);
        for (row, col) in self.site_transition_pairs(site, a, b) {
            m[(row, col)] = ONE;
        }
        m
    }

    /// (row, col) basis pairs making up |a⟩⟨b| on `site`.
    pub fn site_transition_pairs(&self, site: usize, a: usize, b: usize) -> Vec<(usize, usize)> {
        if self.is_product() {
            (0..self.dim)
                .filter_map(|col| {
                    let mut d = self.digits(col);
                    if d[site] != b {
                        return None;
                    }
                    d[site] = a;
                    Some((self.product_index(&d), col))
                })
                .collect()
        } else {
            match (self.index(site, a), self.index(site, b)) {
                (Some(r), Some(c)) => vec![(r, c)],
                _ => Vec::new(),
            }
        }
    }

    /// Ground state of site 0 with every other Förster site in |0⟩.
    pub fn initial_state(&self) -> CMat {
        let idx = if self.is_product() {
            let mut d = vec![0; self.n_sites];
            d[0] = 1;
            self.product_index(&d)
        } else {
            0
        };
        let mut rho = zeros(self.dim);
        rho[(idx, idx)] = ONE;
        rho
    }

    /// Human-readable label of a basis state.
    pub fn label(&self, state: usize) -> String {
        if self.is_product() {
            self.digits(state)
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("")
        } else {
            format!("s{}_l{}", state / 3 + 1, state % 3 + 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_electron_index_map_is_a_bijection() {
        let s = LevelScheme::new(SchemeKind::DexterAll, 4);
        assert_eq!(s.dim, 12);
        let mut seen = vec![false; s.dim];
        for l in 0..4 {
            for i in 1..=3 {
                let k = s.index(l, i).unwrap();
                assert!(!seen[k]);
                seen[k] = true;
                assert_eq!(s.level_of(k, l), Some(i));
                assert_eq!(s.level_of(k, (l + 1) % 4), None);
            }
        }
        assert!(seen.iter().all(|&b| b));
        assert_eq!(s.index(4, 1), None);
        assert_eq!(s.index(0, 0), None);
        assert_eq!(s.label(5), "s2_l3");
    }

    #[test]
    fn single_forces_one_site() {
        let s = LevelScheme::new(SchemeKind::Single, 7);
        assert_eq!((s.n_sites, s.dim), (1, 3));
        assert_eq!(s.min_level(), 1);
    }

    #[test]
    fn product_digits_round_trip() {
        let s = LevelScheme::new(SchemeKind::Foerster, 3);
        assert_eq!(s.dim, 64);
        assert_eq!(s.min_level(), 0);
        for state in 0..s.dim {
            assert_eq!(s.product_index(&s.digits(state)), state);
        }
        assert_eq!(s.digits(s.product_index(&[3, 0, 2])), vec![3, 0, 2]);
        assert_eq!(s.label(s.product_index(&[1, 2, 0])), "120");
        assert_eq!(s.index(0, 1), None);
    }

    #[test]
    fn site_operator_acts_only_on_its_site() {
        let s = LevelScheme::new(SchemeKind::Foerster, 2);
        let op = s.site_operator(1, 2, 0);
        assert_eq!(op.iter().filter(|z| z.norm() > 0.0).count(), 4);
        for c in 0..s.dim {
            let d = s.digits(c);
            let col_nonzero = (0..s.dim).filter(|&r| op[(r, c)].norm() > 0.0).collect::<Vec<_>>();
            if d[1] == 0 {
                assert_eq!(col_nonzero, vec![s.product_index(&[d[0], 2])]);
            } else {
                assert!(col_nonzero.is_empty());
            }
        }
        let d = LevelScheme::new(SchemeKind::DexterSingle, 2);
        assert_eq!(d.site_transition_pairs(1, 1, 3), vec![(3, 5)]);
        assert!(d.site_transition_pairs(1, 0, 3).is_empty());
    }

    #[test]
    fn initial_state_is_the_first_ground_level() {
        let d = LevelScheme::new(SchemeKind::DexterSingle, 3);
        let rho = d.initial_state();
        assert_eq!(rho[(0, 0)], ONE);
        assert_eq!(rho.iter().filter(|z| z.norm() > 0.0).count(), 1);
        let f = LevelScheme::new(SchemeKind::Foerster, 2);
        let rho = f.initial_state();
        let k = f.product_index(&[1, 0]);
        assert_eq!(rho[(k, k)], ONE);
        assert_eq!(rho.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }
}
