//! Finite groups given by Cayley tables.
//!
//! Elements are dense indices `0..order`. The identity is discovered from the
//! table rather than assumed to sit at index 0. Cyclic groups are stored by
//! their law `(i + j) mod n` so that large grids (e.g. `Z_4096` used to sample
//! circle densities) do not need an `n × n` table in memory.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest cyclic group that may be constructed.
pub const MAX_CYCLIC_ORDER: usize = 1 << 16;
/// Largest group accepted from an explicit table (full `O(n³)` axiom scan).
pub const MAX_TABLE_ORDER: usize = 1024;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Law {
    Cyclic,
    Table(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    law: Law,
    identity: usize,
    inverse: Vec<usize>,
    labels: Option<Vec<String>>,
}

impl FiniteGroup {
    /// Validates a Cayley table and computes identity and inverses.
    pub fn from_table(table: Vec<Vec<usize>>, labels: Option<Vec<String>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::NotAGroup("empty table".into()));
        }
        if n > MAX_TABLE_ORDER {
            return Err(Error::UnsupportedSize(format!(
                "table of order {n} exceeds {MAX_TABLE_ORDER}"
            )));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotAGroup(format!(
                    "table is not square: row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some((j, &v)) = row.iter().enumerate().find(|(_, &v)| v >= n) {
                return Err(Error::NotAGroup(format!(
                    "closure fails: table[{i}][{j}] = {v} is not an element"
                )));
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::NotAGroup(format!("{} labels for {n} elements", labels.len())));
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if table[table[i][j]][k] != table[i][table[j][k]] {
                        return Err(Error::NotAGroup(format!("associativity fails for ({i}, {j}, {k})")));
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|i| table[e][i] == i && table[i][e] == i))
            .ok_or_else(|| Error::NotAGroup("no identity element".into()))?;
        let mut inverse = Vec::with_capacity(n);
        for (i, row) in table.iter().enumerate() {
            let inv = (0..n)
                .find(|&j| row[j] == identity && table[j][i] == identity)
                .ok_or_else(|| Error::NotAGroup(format!("element {i} has no inverse")))?;
            inverse.push(inv);
        }
        let flat = table.into_iter().flatten().map(|v| v as u32).collect();
        Ok(FiniteGroup {
            order: n,
            law: Law::Table(flat),
            identity,
            inverse,
            labels,
        })
    }

    /// Trusted constructor for tables produced by the built-in families.
    fn from_trusted_table(table: Vec<Vec<usize>>, labels: Option<Vec<String>>) -> Self {
        let n = table.len();
        let identity = (0..n)
            .find(|&e| (0..n).all(|i| table[e][i] == i && table[i][e] == i))
            .expect("built-in table has an identity");
        let inverse = (0..n)
            .map(|i| (0..n).find(|&j| table[i][j] == identity).expect("built-in inverse"))
            .collect();
        let flat = table.into_iter().flatten().map(|v| v as u32).collect();
        FiniteGroup {
            order: n,
            law: Law::Table(flat),
            identity,
            inverse,
            labels,
        }
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_CYCLIC_ORDER {
            return Err(Error::UnsupportedSize(format!(
                "cyclic({n}): order must be in 1..={MAX_CYCLIC_ORDER}"
            )));
        }
        let inverse = (0..n).map(|i| (n - i) % n).collect();
        Ok(FiniteGroup {
            order: n,
            law: Law::Cyclic,
            identity: 0,
            inverse,
            labels: None,
        })
    }

    /// Dihedral group of order `2n`: indices `k < n` are rotations `r^k`,
    /// indices `n + k` are reflections `s r^k`.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n == 0 || n > 512 {
            return Err(Error::UnsupportedSize(format!("dihedral({n}): n must be in 1..=512")));
        }
        let decode = |x: usize| (x >= n, x % n);
        let encode = |s: bool, k: usize| if s { n + k } else { k };
        let table = (0..2 * n)
            .map(|a| {
                (0..2 * n)
                    .map(|b| {
                        let (sa, ka) = decode(a);
                        let (sb, kb) = decode(b);
                        // r^a s = s r^{-a}
                        let k = if sb { (n - ka + kb) % n } else { (ka + kb) % n };
                        encode(sa ^ sb, k)
                    })
                    .collect()
            })
            .collect();
        let labels = (0..2 * n)
            .map(|x| {
                let (s, k) = decode(x);
                if s {
                    format!("sr{k}")
                } else {
                    format!("r{k}")
                }
            })
            .collect();
        Ok(Self::from_trusted_table(table, Some(labels)))
    }

    /// Symmetric group on `n <= 5` points, permutations in lexicographic order,
    /// composed as `(σ∗τ)(i) = σ(τ(i))`.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 || n > 5 {
            return Err(Error::UnsupportedSize(format!("symmetric({n}): n must be in 1..=5")));
        }
        let perms = permutations(n);
        let index: HashMap<Vec<usize>, usize> = perms.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let table = perms
            .iter()
            .map(|s| perms.iter().map(|t| index[&compose(s, t)]).collect())
            .collect();
        let labels = perms.iter().map(|p| perm_label(p)).collect();
        Ok(Self::from_trusted_table(table, Some(labels)))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        match &self.law {
            Law::Cyclic => {
                let s = a + b;
                if s >= self.order {
                    s - self.order
                } else {
                    s
                }
            }
            Law::Table(t) => t[a * self.order + b] as usize,
        }
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn inverses(&self) -> &[usize] {
        &self.inverse
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, a: usize) -> String {
        match &self.labels {
            Some(l) => l[a].clone(),
            None => a.to_string(),
        }
    }

    /// Materialized Cayley table, `table[i][j] = i ∗ j`.
    pub fn table(&self) -> Vec<Vec<usize>> {
        (0..self.order)
            .map(|i| (0..self.order).map(|j| self.mul(i, j)).collect())
            .collect()
    }

    pub fn check_index(&self, a: usize) -> Result<()> {
        if a < self.order {
            Ok(())
        } else {
            Err(Error::InvalidIndex {
                index: a,
                order: self.order,
            })
        }
    }

    /// True when the law is `(i + j) mod n` on the indices.
    pub fn is_standard_cyclic(&self) -> bool {
        match &self.law {
            Law::Cyclic => true,
            Law::Table(_) => (0..self.order).all(|i| (0..self.order).all(|j| self.mul(i, j) == (i + j) % self.order)),
        }
    }

    pub fn is_abelian(&self) -> bool {
        match &self.law {
            Law::Cyclic => true,
            Law::Table(_) => (0..self.order).all(|i| (i + 1..self.order).all(|j| self.mul(i, j) == self.mul(j, i))),
        }
    }

    /// Smallest `k >= 1` with `a^k = e`.
    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Sorted multiset of element orders; an isomorphism invariant.
    pub fn order_census(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.order).map(|a| self.element_order(a)).collect();
        v.sort_unstable();
        v
    }

    /// Full scan of the group axioms; returns the first violation found.
    pub fn verify_axioms(&self) -> std::result::Result<(), String> {
        let n = self.order;
        for i in 0..n {
            if self.mul(self.identity, i) != i || self.mul(i, self.identity) != i {
                return Err(format!("identity fails at {i}"));
            }
            if self.mul(i, self.inv(i)) != self.identity {
                return Err(format!("inverse fails at {i}"));
            }
            for j in 0..n {
                let ij = self.mul(i, j);
                if ij >= n {
                    return Err(format!("closure fails at ({i}, {j})"));
                }
                for k in 0..n {
                    if self.mul(ij, k) != self.mul(i, self.mul(j, k)) {
                        return Err(format!("associativity fails for ({i}, {j}, {k})"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> GroupJson {
        GroupJson {
            order: self.order,
            table: (0..self.order)
                .flat_map(|i| (0..self.order).map(move |j| (i, j)))
                .map(|(i, j)| self.mul(i, j))
                .collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn from_json(json: &GroupJson) -> Result<Self> {
        if json.table.len() != json.order * json.order {
            return Err(Error::NotAGroup(format!(
                "table has {} entries, expected {}",
                json.table.len(),
                json.order * json.order
            )));
        }
        let rows = json.table.chunks(json.order.max(1)).map(|r| r.to_vec()).collect();
        Self::from_table(rows, json.labels.clone())
    }
}

/// Serialized group: row-major Cayley table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupJson {
    pub order: usize,
    pub table: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// Built-in group families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupFamily {
    Cyclic(usize),
    Dihedral(usize),
    Symmetric(usize),
    CubeRotations,
}

impl FromStr for GroupFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s, None),
        };
        let size = || -> Result<usize> {
            arg.ok_or_else(|| Error::Parse(format!("group '{s}' needs a size, e.g. {name}:6")))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad group size in '{s}'")))
        };
        match name {
            "cyclic" | "Z" => Ok(GroupFamily::Cyclic(size()?)),
            "dihedral" | "D" => Ok(GroupFamily::Dihedral(size()?)),
            "symmetric" | "S" => Ok(GroupFamily::Symmetric(size()?)),
            "cube" | "cube_rotations" => Ok(GroupFamily::CubeRotations),
            _ => Err(Error::Parse(format!("unknown group family '{s}'"))),
        }
    }
}

impl fmt::Display for GroupFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupFamily::Cyclic(n) => write!(f, "cyclic:{n}"),
            GroupFamily::Dihedral(n) => write!(f, "dihedral:{n}"),
            GroupFamily::Symmetric(n) => write!(f, "symmetric:{n}"),
            GroupFamily::CubeRotations => write!(f, "cube_rotations"),
        }
    }
}

/// Builds a member of a built-in family. `cube_rotations` also returns its
/// action on the six faces.
pub fn builtin_group(family: GroupFamily) -> Result<(Arc<FiniteGroup>, Option<GroupAction>)> {
    match family {
        GroupFamily::Cyclic(n) => Ok((Arc::new(FiniteGroup::cyclic(n)?), None)),
        GroupFamily::Dihedral(n) => Ok((Arc::new(FiniteGroup::dihedral(n)?), None)),
        GroupFamily::Symmetric(n) => Ok((Arc::new(FiniteGroup::symmetric(n)?), None)),
        GroupFamily::CubeRotations => {
            let (g, a) = cube_rotations();
            Ok((g, Some(a)))
        }
    }
}

/// Faces of the cube, in index order.
pub const CUBE_FACES: [&str; 6] = ["+x", "-x", "+y", "-y", "+z", "-z"];

/// Rotation group of the cube with its action on the faces.
///
/// Generated by quarter turns about the z and x axes.
pub fn cube_rotations() -> (Arc<FiniteGroup>, GroupAction) {
    // +x -> +y -> -x -> -y -> +x
    let quarter_z = vec![2, 3, 1, 0, 4, 5];
    // +y -> +z -> -y -> -z -> +y
    let quarter_x = vec![0, 1, 4, 5, 3, 2];
    let (group, action) = permutation_group(6, &[quarter_z, quarter_x]).expect("cube generators are permutations");
    assert_eq!(group.order(), 24, "cube rotation closure must have 24 elements");
    (group, action)
}

/// Closes a set of permutations of `points` under composition, giving the
/// generated group and its natural action.
pub fn permutation_group(points: usize, generators: &[Vec<usize>]) -> Result<(Arc<FiniteGroup>, GroupAction)> {
    for g in generators {
        if !is_permutation(g, points) {
            return Err(Error::InvalidAction(format!(
                "{g:?} is not a permutation of {points} points"
            )));
        }
    }
    let id: Vec<usize> = (0..points).collect();
    let mut elements = vec![id.clone()];
    let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(id, 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in generators {
            let p = compose(&elements[i], g);
            if !index.contains_key(&p) {
                if elements.len() >= MAX_TABLE_ORDER {
                    return Err(Error::UnsupportedSize("generated group too large".into()));
                }
                index.insert(p.clone(), elements.len());
                queue.push_back(elements.len());
                elements.push(p);
            }
        }
    }
    let table = elements
        .iter()
        .map(|s| elements.iter().map(|t| index[&compose(s, t)]).collect())
        .collect();
    let labels = elements.iter().map(|p| perm_label(p)).collect();
    let group = Arc::new(FiniteGroup::from_trusted_table(table, Some(labels)));
    let action = GroupAction {
        group: group.clone(),
        points,
        perm: elements,
    };
    Ok((group, action))
}

fn is_permutation(p: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    p.len() == n && p.iter().all(|&x| x < n && !std::mem::replace(&mut seen[x], true))
}

fn compose(s: &[usize], t: &[usize]) -> Vec<usize> {
    t.iter().map(|&i| s[i]).collect()
}

fn perm_label(p: &[usize]) -> String {
    let body: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    format!("[{}]", body.join(" "))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    parent: Arc<FiniteGroup>,
    members: Vec<usize>,
}

impl Subgroup {
    pub fn parent(&self) -> &Arc<FiniteGroup> {
        &self.parent
    }

    /// Sorted element indices.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, a: usize) -> bool {
        self.members.binary_search(&a).is_ok()
    }

    pub fn is_whole_group(&self) -> bool {
        self.members.len() == self.parent.order()
    }

    pub fn index(&self) -> usize {
        self.parent.order() / self.members.len()
    }

    /// `g F g⁻¹ = F` for every `g`.
    pub fn is_normal(&self) -> bool {
        let g = &self.parent;
        (0..g.order()).all(|x| {
            self.members
                .iter()
                .all(|&f| self.contains(g.mul(g.mul(x, f), g.inv(x))))
        })
    }
}

/// Smallest subgroup containing `seed`.
pub fn subgroup_closure(group: &Arc<FiniteGroup>, seed: &[usize]) -> Result<Subgroup> {
    if seed.is_empty() {
        return Err(Error::EmptySeed);
    }
    for &s in seed {
        group.check_index(s)?;
    }
    let gens: BTreeSet<usize> = seed.iter().copied().collect();
    let mut inside = vec![false; group.order()];
    inside[group.identity()] = true;
    let mut queue = VecDeque::from([group.identity()]);
    // In a finite group, closing under right multiplication by the generators
    // already yields inverses (they are positive powers).
    while let Some(x) = queue.pop_front() {
        for &s in &gens {
            let y = group.mul(x, s);
            if !inside[y] {
                inside[y] = true;
                queue.push_back(y);
            }
        }
    }
    let members = (0..group.order()).filter(|&i| inside[i]).collect();
    Ok(Subgroup {
        parent: group.clone(),
        members,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetDecomposition {
    pub index: usize,
    /// Left cosets `gF`, each sorted, ordered by smallest element.
    pub left_cosets: Vec<Vec<usize>>,
}

pub fn coset_analysis(subgroup: &Subgroup) -> CosetDecomposition {
    let g = subgroup.parent();
    let mut assigned = vec![false; g.order()];
    let mut left_cosets = Vec::new();
    for rep in 0..g.order() {
        if assigned[rep] {
            continue;
        }
        let mut coset: Vec<usize> = subgroup.members().iter().map(|&f| g.mul(rep, f)).collect();
        coset.sort_unstable();
        for &x in &coset {
            assigned[x] = true;
        }
        left_cosets.push(coset);
    }
    CosetDecomposition {
        index: left_cosets.len(),
        left_cosets,
    }
}

/// A group acting on `points` by permutations.
#[derive(Clone, Debug)]
pub struct GroupAction {
    group: Arc<FiniteGroup>,
    points: usize,
    perm: Vec<Vec<usize>>,
}

impl GroupAction {
    pub fn new(group: Arc<FiniteGroup>, points: usize, perm: Vec<Vec<usize>>) -> Result<Self> {
        if perm.len() != group.order() {
            return Err(Error::InvalidAction(format!(
                "{} permutations for a group of order {}",
                perm.len(),
                group.order()
            )));
        }
        if let Some(bad) = perm.iter().position(|p| !is_permutation(p, points)) {
            return Err(Error::InvalidAction(format!("perm[{bad}] is not a permutation")));
        }
        if perm[group.identity()].iter().enumerate().any(|(i, &x)| i != x) {
            return Err(Error::InvalidAction("identity does not act trivially".into()));
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                if perm[group.mul(g, h)] != compose(&perm[g], &perm[h]) {
                    return Err(Error::InvalidAction(format!(
                        "perm[{g}∗{h}] differs from perm[{g}]∘perm[{h}]"
                    )));
                }
            }
        }
        Ok(GroupAction { group, points, perm })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn apply(&self, g: usize, point: usize) -> usize {
        self.perm[g][point]
    }

    pub fn permutation(&self, g: usize) -> &[usize] {
        &self.perm[g]
    }

    /// Orbits, each sorted, ordered by smallest point.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.points];
        let mut orbits = Vec::new();
        for start in 0..self.points {
            if seen[start] {
                continue;
            }
            let mut orbit: Vec<usize> = (0..self.group.order()).map(|g| self.perm[g][start]).collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &p in &orbit {
                seen[p] = true;
            }
            orbits.push(orbit);
        }
        orbits
    }

    pub fn is_transitive(&self) -> bool {
        self.orbits().len() == 1
    }
}

/// Extreme points of the invariant distributions: the uniform distribution on
/// each orbit. An invariant distribution is exactly one that is constant on
/// orbits, so these span all of them.
pub fn invariant_distributions(action: &GroupAction) -> Vec<Vec<f64>> {
    action
        .orbits()
        .into_iter()
        .map(|orbit| {
            let mut d = vec![0.0; action.points()];
            let w = 1.0 / orbit.len() as f64;
            for p in orbit {
                d[p] = w;
            }
            d
        })
        .collect()
}
