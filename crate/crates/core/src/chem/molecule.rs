use serde::{Deserialize, Serialize};

use super::Element;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Small integer code used in fragment hashing.
    pub fn code(self) -> u64 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }

    /// Contribution to the valence sum; aromatic bonds count as one here and
    /// the extra electron is accounted for per atom.
    pub(crate) fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BondOrder::Single => "-",
            BondOrder::Double => "=",
            BondOrder::Triple => "#",
            BondOrder::Aromatic => ":",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    pub formal_charge: i8,
    pub aromatic: bool,
    /// Hydrogen count written in a bracket atom, if any.
    pub explicit_h_count: Option<u8>,
    /// Hydrogens implied by the valence model (zero for bracket atoms).
    pub implicit_h_count: u8,
    pub ring_member: bool,
}

impl Atom {
    pub fn total_h_count(&self) -> u8 {
        self.explicit_h_count.unwrap_or(0) + self.implicit_h_count
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// Heavy-atom molecular graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
    adjacency: Vec<Vec<usize>>,
}

impl Molecule {
    /// Builds the graph and derives ring membership. Bonds are assumed valid.
    pub(crate) fn from_parts(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Self {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (i, bond) in bonds.iter().enumerate() {
            adjacency[bond.a].push(i);
            adjacency[bond.b].push(i);
        }
        let mut mol = Molecule { atoms, bonds, adjacency };
        let ring_bonds = mol.ring_bonds();
        for atom in mol.atoms.iter_mut() {
            atom.ring_member = false;
        }
        for (i, bond) in mol.bonds.iter().enumerate() {
            if ring_bonds[i] {
                mol.atoms[bond.a].ring_member = true;
                mol.atoms[bond.b].ring_member = true;
            }
        }
        mol
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Indices into `bonds` of the bonds touching `atom`.
    pub fn bonds_of(&self, atom: usize) -> &[usize] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn neighbors(&self, atom: usize) -> impl Iterator<Item = (usize, BondOrder)> + '_ {
        self.adjacency[atom].iter().map(move |&bi| {
            let bond = &self.bonds[bi];
            (bond.other(atom), bond.order)
        })
    }

    /// A bond lies on a ring iff it is not a bridge of the graph.
    fn ring_bonds(&self) -> Vec<bool> {
        let n = self.atoms.len();
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut is_bridge = vec![false; self.bonds.len()];
        let mut timer = 0;
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            // (atom, bond used to enter, next adjacency slot)
            let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            while let Some(top) = stack.last_mut() {
                let (v, parent_bond) = (top.0, top.1);
                if top.2 < self.adjacency[v].len() {
                    let bi = self.adjacency[v][top.2];
                    top.2 += 1;
                    if bi == parent_bond {
                        continue;
                    }
                    let w = self.bonds[bi].other(v);
                    if disc[w] == usize::MAX {
                        disc[w] = timer;
                        low[w] = timer;
                        timer += 1;
                        stack.push((w, bi, 0));
                    } else {
                        low[v] = low[v].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(u, _, _)) = stack.last() {
                        low[u] = low[u].min(low[v]);
                        if low[v] > disc[u] {
                            is_bridge[parent_bond] = true;
                        }
                    }
                }
            }
        }
        is_bridge.iter().map(|b| !b).collect()
    }
}
