//! Set partitions of users.
//!
//! Users are 0-based internally. The textual key used as a class label is
//! 1-based, blocks joined by `|` and members by `,` (e.g. `1,3|2,4`).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest `N` accepted by [`enumerate_partitions`]; Bell(10) = 115975.
pub const MAX_ENUMERATION_USERS: usize = 10;

/// A grouping of users `0..n` into disjoint nonempty blocks, kept in
/// canonical form: members ascending, blocks ordered by their minimum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Validates and canonicalises `blocks` over users `0..num_users`.
    pub fn new(mut blocks: Vec<Vec<usize>>, num_users: usize) -> Result<Self> {
        let mut seen = vec![false; num_users];
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::Domain("empty block in partition".into()));
            }
            b.sort_unstable();
            for &u in b.iter() {
                if u >= num_users {
                    return Err(Error::Domain(alloc::format!("user {u} out of range 0..{num_users}")));
                }
                if seen[u] {
                    return Err(Error::Domain(alloc::format!("user {u} appears twice")));
                }
                seen[u] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Domain(alloc::format!("user {missing} not covered")));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Partition { blocks })
    }

    /// Every user in its own block.
    pub fn singletons(num_users: usize) -> Self {
        Partition { blocks: (0..num_users).map(|u| vec![u]).collect() }
    }

    /// One block with everybody.
    pub fn universal(num_users: usize) -> Self {
        Partition { blocks: if num_users == 0 { Vec::new() } else { vec![(0..num_users).collect()] } }
    }

    /// Builds a partition from a block index per user (any labels).
    pub fn from_assignment(assignment: &[usize]) -> Self {
        let mut blocks: Vec<(usize, Vec<usize>)> = Vec::new();
        for (u, &label) in assignment.iter().enumerate() {
            match blocks.iter_mut().find(|(l, _)| *l == label) {
                Some((_, b)) => b.push(u),
                None => blocks.push((label, vec![u])),
            }
        }
        Partition { blocks: blocks.into_iter().map(|(_, b)| b).collect() }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_groups(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_users(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// Block index of every user.
    pub fn group_of(&self) -> Vec<usize> {
        let mut g = vec![0; self.num_users()];
        for (i, b) in self.blocks.iter().enumerate() {
            for &u in b {
                g[u] = i;
            }
        }
        g
    }

    /// Merges blocks `a` and `b` and re-canonicalises.
    pub fn merge(&self, a: usize, b: usize) -> Self {
        assert!(a != b && a < self.blocks.len() && b < self.blocks.len());
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let mut blocks = self.blocks.clone();
        let moved = blocks.remove(hi);
        blocks[lo].extend(moved);
        blocks[lo].sort_unstable();
        blocks.sort_unstable_by_key(|b| b[0]);
        Partition { blocks }
    }

    /// True when every block of `self` sits inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        let g = coarser.group_of();
        self.num_users() == coarser.num_users()
            && self.blocks.iter().all(|b| b.iter().all(|&u| g[u] == g[b[0]]))
    }

    /// Canonical 1-based text key.
    pub fn key(&self) -> String {
        alloc::format!("{self}")
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            for (j, u) in b.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", u + 1)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses a 1-based key; the user count is inferred from the largest id.
    fn from_str(s: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        let mut max = 0;
        for part in s.split('|') {
            let mut block = Vec::new();
            for tok in part.split(',') {
                let id: usize = tok
                    .trim()
                    .parse()
                    .map_err(|_| Error::Domain(alloc::format!("bad user id {tok:?} in partition key")))?;
                if id == 0 {
                    return Err(Error::Domain("partition keys are 1-based".into()));
                }
                max = max.max(id);
                block.push(id - 1);
            }
            blocks.push(block);
        }
        Partition::new(blocks, max)
    }
}

impl TryFrom<String> for Partition {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Partition> for String {
    fn from(p: Partition) -> String {
        p.key()
    }
}

/// Bell number `B(n)` for small `n`.
pub fn bell(n: usize) -> u64 {
    // Bell triangle
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("nonempty"));
        for &v in &row {
            let prev = *next.last().expect("nonempty");
            next.push(prev + v);
        }
        row = next;
    }
    row[0]
}

/// Every set partition of `0..n` in canonical form, via restricted growth
/// strings in lexicographic order.
pub fn enumerate_partitions(n: usize) -> Result<Vec<Partition>> {
    if n > MAX_ENUMERATION_USERS {
        return Err(Error::ResourceGuard(alloc::format!(
            "refusing to enumerate Bell({n}) partitions (limit N <= {MAX_ENUMERATION_USERS})"
        )));
    }
    if n == 0 {
        return Ok(vec![Partition { blocks: Vec::new() }]);
    }
    let mut out = Vec::with_capacity(bell(n) as usize);
    let mut rgs = vec![0usize; n];
    // running maximum of rgs[..=i]
    let mut maxes = vec![0usize; n];
    loop {
        out.push(Partition::from_assignment(&rgs));
        // find rightmost position that can be incremented
        let mut i = n - 1;
        loop {
            if i == 0 {
                return Ok(out);
            }
            if rgs[i] <= maxes[i - 1] {
                break;
            }
            i -= 1;
        }
        rgs[i] += 1;
        maxes[i] = maxes[i - 1].max(rgs[i]);
        for j in i + 1..n {
            rgs[j] = 0;
            maxes[j] = maxes[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn canonical_form_and_key() {
        let p = Partition::new(vec![vec![3, 1], vec![2, 0]], 4).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 2], vec![1, 3]]);
        assert_eq!(p.key(), "1,3|2,4");
        assert_eq!("1,3|2,4".parse::<Partition>().unwrap(), p);
        assert_eq!("2,4|3,1".parse::<Partition>().unwrap(), p);
    }

    #[test]
    fn invalid_partitions() {
        assert!(Partition::new(vec![vec![0], vec![0, 1]], 2).is_err());
        assert!(Partition::new(vec![vec![0]], 2).is_err());
        assert!(Partition::new(vec![vec![0, 5]], 2).is_err());
        assert!(Partition::new(vec![vec![], vec![0]], 1).is_err());
        assert!("0,1".parse::<Partition>().is_err());
        assert!("1,x".parse::<Partition>().is_err());
    }

    #[test]
    fn bell_numbers() {
        let known = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975];
        for (n, &b) in known.iter().enumerate() {
            assert_eq!(bell(n), b);
        }
    }

    #[test]
    fn enumeration_counts_and_canonical() {
        for n in 1..=7 {
            let parts = enumerate_partitions(n).unwrap();
            assert_eq!(parts.len() as u64, bell(n));
            let keys: BTreeSet<_> = parts.iter().map(Partition::key).collect();
            assert_eq!(keys.len(), parts.len());
            for p in &parts {
                let again = Partition::new(p.blocks().to_vec(), n).unwrap();
                assert_eq!(&again, p);
            }
        }
        assert_eq!(enumerate_partitions(3).unwrap().len(), 5);
        assert_eq!(enumerate_partitions(5).unwrap().len(), 52);
    }

    #[test]
    fn enumeration_guard() {
        assert!(matches!(enumerate_partitions(11), Err(Error::ResourceGuard(_))));
    }

    #[test]
    fn merge_and_refine() {
        let s = Partition::singletons(4);
        let m = s.merge(3, 1);
        assert_eq!(m.key(), "1|2,4|3");
        assert!(s.refines(&m));
        assert!(m.refines(&Partition::universal(4)));
        assert!(!Partition::universal(4).refines(&m));
    }
}
