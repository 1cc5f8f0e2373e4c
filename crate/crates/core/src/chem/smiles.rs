//! SMILES reader and writer.
//!
//! Supported: the organic subset, lowercase aromatic atoms, bracket atoms
//! with isotope, hydrogen count, charge and atom class, branches, ring
//! closures (single digits and `%nn`), the bond symbols `- = # :` and
//! dot-separated components. Stereo markers (`/ \ @ @@`) are accepted and
//! dropped. Aromaticity is taken from the input as written.

use std::collections::HashMap;

use super::{Atom, Bond, BondOrder, ChemError, Element, Molecule};

struct PendingRing {
    atom: usize,
    order: Option<BondOrder>,
    offset: usize,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    /// true when the atom came from a bracket (no implicit hydrogens)
    bracketed: Vec<bool>,
    bonds: Vec<Bond>,
    rings: HashMap<u32, PendingRing>,
}

/// Implicit hydrogens of an organic-subset atom whose bonds use `used`
/// valence (aromatic bonds counting one). An aromatic atom takes its lowest
/// valence and spends one unit on the ring's pi system unless it is already
/// saturated, as in pyrrole-type `n(C)` or `c(=O)`.
fn implied_hydrogens(element: Element, aromatic: bool, used: u8) -> Option<u8> {
    let valences = element.default_valences()?;
    if aromatic {
        let &v = valences.first()?;
        return if used < v {
            Some(v - used - 1)
        } else {
            valences.iter().any(|&v| v >= used).then_some(0)
        };
    }
    valences.iter().find(|&&v| v >= used).map(|&v| v - used)
}

/// Parses a SMILES string into its heavy-atom graph.
///
/// Explicit `[H]` atoms are folded into the hydrogen count of their heavy
/// neighbour. Organic-subset atoms whose bonds exceed every standard valence
/// are rejected.
pub fn parse_smiles(s: &str) -> Result<Molecule, ChemError> {
    if s.is_empty() {
        return Err(ChemError::syntax(0, "empty input"));
    }
    if let Some(off) = s.bytes().position(|b| !b.is_ascii() || b.is_ascii_whitespace()) {
        return Err(ChemError::syntax(off, "unexpected character"));
    }
    let mut p = Parser {
        src: s.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bracketed: Vec::new(),
        bonds: Vec::new(),
        rings: HashMap::new(),
    };
    p.parse()?;
    p.finish()
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn parse(&mut self) -> Result<(), ChemError> {
        // previous atom on the current chain, and open branch points
        let mut prev: Option<usize> = None;
        let mut branches: Vec<(usize, usize)> = Vec::new();
        let mut pending_bond: Option<(BondOrder, usize)> = None;
        let mut expect_atom = true;

        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    let Some(p) = prev else {
                        return Err(ChemError::syntax(start, "branch without a preceding atom"));
                    };
                    if pending_bond.is_some() {
                        return Err(ChemError::syntax(start, "bond symbol before branch"));
                    }
                    branches.push((p, start));
                    self.pos += 1;
                    expect_atom = true;
                }
                b')' => {
                    let Some((p, _)) = branches.pop() else {
                        return Err(ChemError::syntax(start, "unmatched ')'"));
                    };
                    if expect_atom || pending_bond.is_some() {
                        return Err(ChemError::syntax(start, "empty branch or dangling bond"));
                    }
                    prev = Some(p);
                    self.pos += 1;
                }
                b'.' => {
                    if pending_bond.is_some() || prev.is_none() || expect_atom {
                        return Err(ChemError::syntax(start, "misplaced '.'"));
                    }
                    prev = None;
                    self.pos += 1;
                    expect_atom = true;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if pending_bond.is_some() || prev.is_none() {
                        return Err(ChemError::syntax(start, "misplaced bond symbol"));
                    }
                    let order = match c {
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        b':' => BondOrder::Aromatic,
                        _ => BondOrder::Single,
                    };
                    // '/' and '\' only carry stereo; keep them as "unspecified"
                    // so aromatic defaults still apply.
                    if c != b'/' && c != b'\\' {
                        pending_bond = Some((order, start));
                    } else {
                        pending_bond = Some((BondOrder::Single, usize::MAX));
                    }
                    self.pos += 1;
                }
                b'$' => return Err(ChemError::syntax(start, "quadruple bonds are not supported")),
                b'0'..=b'9' | b'%' => {
                    let Some(p) = prev else {
                        return Err(ChemError::syntax(start, "ring closure without an atom"));
                    };
                    if expect_atom {
                        return Err(ChemError::syntax(start, "ring closure without an atom"));
                    }
                    let num = self.ring_number()?;
                    let bond = pending_bond.take();
                    self.ring_closure(p, num, bond, start)?;
                }
                _ => {
                    let atom = self.atom()?;
                    if let Some(p) = prev {
                        let order = match pending_bond.take() {
                            Some((o, off)) if off != usize::MAX => o,
                            _ => self.default_order(p, atom),
                        };
                        self.add_bond(p, atom, order, start)?;
                    } else if let Some((_, off)) = pending_bond.take() {
                        return Err(ChemError::syntax(off.min(start), "bond without a preceding atom"));
                    }
                    prev = Some(atom);
                    expect_atom = false;
                }
            }
        }

        if let Some((_, off)) = branches.first() {
            return Err(ChemError::syntax(*off, "unclosed branch"));
        }
        if let Some((_, off)) = pending_bond {
            return Err(ChemError::syntax(off.min(self.src.len()), "dangling bond"));
        }
        if expect_atom {
            return Err(ChemError::syntax(self.src.len(), "expected an atom"));
        }
        if let Some(ring) = self.rings.values().min_by_key(|r| r.offset) {
            return Err(ChemError::syntax(ring.offset, "unclosed ring"));
        }
        Ok(())
    }

    fn ring_number(&mut self) -> Result<u32, ChemError> {
        let start = self.pos;
        if self.peek() == Some(b'%') {
            self.pos += 1;
            let digits = self.src.get(self.pos..self.pos + 2);
            match digits {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.pos += 2;
                    Ok(u32::from(d[0] - b'0') * 10 + u32::from(d[1] - b'0'))
                }
                _ => Err(ChemError::syntax(start, "'%' must be followed by two digits")),
            }
        } else {
            let d = self.src[self.pos];
            self.pos += 1;
            Ok(u32::from(d - b'0'))
        }
    }

    fn ring_closure(
        &mut self,
        atom: usize,
        num: u32,
        bond: Option<(BondOrder, usize)>,
        offset: usize,
    ) -> Result<(), ChemError> {
        let order = bond.and_then(|(o, off)| (off != usize::MAX).then_some(o));
        match self.rings.remove(&num) {
            None => {
                self.rings.insert(num, PendingRing { atom, order, offset });
                Ok(())
            }
            Some(open) => {
                let order = match (open.order, order) {
                    (Some(a), Some(b)) if a != b => {
                        return Err(ChemError::syntax(offset, "conflicting ring bond orders"))
                    }
                    (Some(a), _) | (None, Some(a)) => a,
                    (None, None) => self.default_order(open.atom, atom),
                };
                self.add_bond(open.atom, atom, order, offset)
            }
        }
    }

    fn default_order(&self, a: usize, b: usize) -> BondOrder {
        if self.atoms[a].aromatic && self.atoms[b].aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn add_bond(&mut self, a: usize, b: usize, order: BondOrder, offset: usize) -> Result<(), ChemError> {
        if a == b {
            return Err(ChemError::syntax(offset, "atom bonded to itself"));
        }
        let dup = self
            .bonds
            .iter()
            .any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a));
        if dup {
            return Err(ChemError::syntax(offset, "duplicate bond"));
        }
        self.bonds.push(Bond { a, b, order });
        Ok(())
    }

    fn push_atom(&mut self, atom: Atom, bracketed: bool) -> usize {
        self.atoms.push(atom);
        self.bracketed.push(bracketed);
        self.atoms.len() - 1
    }

    fn atom(&mut self) -> Result<usize, ChemError> {
        let start = self.pos;
        let c = self.src[self.pos];
        if c == b'[' {
            return self.bracket_atom();
        }
        let two = self.src.get(self.pos..self.pos + 2);
        let (element, aromatic, len) = match (c, two) {
            (b'C', Some(b"Cl")) => (Element::Cl, false, 2),
            (b'B', Some(b"Br")) => (Element::Br, false, 2),
            (b'B', _) => (Element::B, false, 1),
            (b'C', _) => (Element::C, false, 1),
            (b'N', _) => (Element::N, false, 1),
            (b'O', _) => (Element::O, false, 1),
            (b'P', _) => (Element::P, false, 1),
            (b'S', _) => (Element::S, false, 1),
            (b'F', _) => (Element::F, false, 1),
            (b'I', _) => (Element::I, false, 1),
            (b'b', _) => (Element::B, true, 1),
            (b'c', _) => (Element::C, true, 1),
            (b'n', _) => (Element::N, true, 1),
            (b'o', _) => (Element::O, true, 1),
            (b'p', _) => (Element::P, true, 1),
            (b's', _) => (Element::S, true, 1),
            (b']', _) => return Err(ChemError::syntax(start, "unmatched ']'")),
            _ => return Err(ChemError::syntax(start, "unknown element or symbol")),
        };
        self.pos += len;
        Ok(self.push_atom(
            Atom {
                element,
                formal_charge: 0,
                aromatic,
                explicit_h_count: None,
                implicit_h_count: 0,
                ring_member: false,
            },
            false,
        ))
    }

    fn bracket_atom(&mut self) -> Result<usize, ChemError> {
        let open = self.pos;
        let Some(rel_close) = self.src[open..].iter().position(|&b| b == b']') else {
            return Err(ChemError::syntax(open, "unclosed bracket atom"));
        };
        let close = open + rel_close;
        let body = &self.src[open + 1..close];
        let mut i = 0;
        let err = |i: usize, msg: &str| ChemError::syntax(open + 1 + i, msg);

        while i < body.len() && body[i].is_ascii_digit() {
            i += 1; // isotope: not used by the invariants
        }

        // element symbol
        let (element, aromatic) = {
            let rest = &body[i..];
            let lower2 = rest.get(..2).and_then(|s| std::str::from_utf8(s).ok());
            let aromatic2 = match lower2 {
                Some("se") => Some(Element::Se),
                Some("as") => Some(Element::As),
                Some("te") => Some(Element::Te),
                _ => None,
            };
            if let Some(e) = aromatic2 {
                i += 2;
                (e, true)
            } else {
                match rest.first() {
                    Some(&c) if c.is_ascii_lowercase() => {
                        let e = match c {
                            b'b' => Element::B,
                            b'c' => Element::C,
                            b'n' => Element::N,
                            b'o' => Element::O,
                            b'p' => Element::P,
                            b's' => Element::S,
                            _ => return Err(err(i, "unknown aromatic element")),
                        };
                        i += 1;
                        (e, true)
                    }
                    Some(&c) if c.is_ascii_uppercase() => {
                        let len = if rest.get(1).is_some_and(u8::is_ascii_lowercase) { 2 } else { 1 };
                        let found = std::str::from_utf8(&rest[..len])
                            .ok()
                            .and_then(Element::from_symbol)
                            .map(|e| (e, len));
                        match found {
                            Some((e, len)) => {
                                i += len;
                                (e, false)
                            }
                            None => return Err(err(i, "unsupported element")),
                        }
                    }
                    _ => return Err(err(i, "missing element symbol")),
                }
            }
        };
        if aromatic && !element.can_be_aromatic() {
            return Err(err(i, "element cannot be aromatic"));
        }

        // chirality
        if body.get(i) == Some(&b'@') {
            i += 1;
            if body.get(i) == Some(&b'@') {
                i += 1;
            } else if let Some(tag) = body.get(i..i + 2) {
                if matches!(tag, b"TH" | b"AL" | b"SP" | b"TB" | b"OH") {
                    i += 2;
                    while i < body.len() && body[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
        }

        // hydrogen count
        let mut h = 0u8;
        if body.get(i) == Some(&b'H') {
            i += 1;
            h = 1;
            if let Some(&d) = body.get(i) {
                if d.is_ascii_digit() {
                    h = d - b'0';
                    i += 1;
                }
            }
        }

        // charge
        let mut charge: i32 = 0;
        if let Some(&sign) = body.get(i) {
            if sign == b'+' || sign == b'-' {
                let unit = if sign == b'+' { 1 } else { -1 };
                i += 1;
                let digits_start = i;
                while i < body.len() && body[i].is_ascii_digit() {
                    i += 1;
                }
                if i > digits_start {
                    let mag: i32 = std::str::from_utf8(&body[digits_start..i])
                        .unwrap()
                        .parse()
                        .map_err(|_| err(digits_start, "bad charge"))?;
                    charge = unit * mag;
                } else {
                    charge = unit;
                    while body.get(i) == Some(&sign) {
                        charge += unit;
                        i += 1;
                    }
                }
            }
        }
        if !(-4..=4).contains(&charge) {
            return Err(err(i.saturating_sub(1), "formal charge out of range"));
        }

        // atom class
        if body.get(i) == Some(&b':') {
            i += 1;
            let s = i;
            while i < body.len() && body[i].is_ascii_digit() {
                i += 1;
            }
            if i == s {
                return Err(err(s, "atom class needs digits"));
            }
        }
        if i != body.len() {
            return Err(err(i, "unexpected character in bracket atom"));
        }
        self.pos = close + 1;
        Ok(self.push_atom(
            Atom {
                element,
                formal_charge: charge as i8,
                aromatic,
                explicit_h_count: Some(h),
                implicit_h_count: 0,
                ring_member: false,
            },
            true,
        ))
    }

    fn finish(self) -> Result<Molecule, ChemError> {
        let Parser { mut atoms, bracketed, bonds, .. } = self;

        // implicit hydrogens for the organic subset
        let mut valence_sum = vec![0u8; atoms.len()];
        for b in &bonds {
            valence_sum[b.a] = valence_sum[b.a].saturating_add(b.order.valence());
            valence_sum[b.b] = valence_sum[b.b].saturating_add(b.order.valence());
        }
        for (i, atom) in atoms.iter_mut().enumerate() {
            if bracketed[i] {
                continue;
            }
            match implied_hydrogens(atom.element, atom.aromatic, valence_sum[i]) {
                Some(h) => atom.implicit_h_count = h,
                None => {
                    return Err(ChemError::Valence { atom: i, element: atom.element.to_string() })
                }
            }
        }

        // fold explicit hydrogen atoms into their heavy neighbour
        let is_h = |a: &Atom| a.element == Element::H;
        let mut keep = vec![true; atoms.len()];
        let mut extra_h = vec![0u8; atoms.len()];
        for (i, atom) in atoms.iter().enumerate() {
            if !is_h(atom) {
                continue;
            }
            let nbrs: Vec<usize> = bonds
                .iter()
                .filter(|b| b.a == i || b.b == i)
                .map(|b| b.other(i))
                .collect();
            match nbrs.as_slice() {
                [] => keep[i] = false,
                [n] if !is_h(&atoms[*n]) => {
                    keep[i] = false;
                    extra_h[*n] += 1;
                }
                // H bonded to H, or bridging hydrogens: drop them all
                _ => keep[i] = false,
            }
        }
        let mut remap = vec![usize::MAX; atoms.len()];
        let mut heavy = Vec::new();
        for (i, atom) in atoms.into_iter().enumerate() {
            if keep[i] {
                remap[i] = heavy.len();
                let mut atom = atom;
                if extra_h[i] > 0 {
                    atom.explicit_h_count = Some(atom.explicit_h_count.unwrap_or(0) + extra_h[i]);
                }
                heavy.push(atom);
            }
        }
        let heavy_bonds = bonds
            .into_iter()
            .filter(|b| keep[b.a] && keep[b.b])
            .map(|b| Bond { a: remap[b.a], b: remap[b.b], order: b.order })
            .collect();
        Ok(Molecule::from_parts(heavy, heavy_bonds))
    }
}

/// Writes a SMILES string that re-parses to the same graph.
///
/// Atoms are emitted in depth-first order from the lowest index of each
/// component. Bracket notation is used whenever the valence model would not
/// reproduce the atom's hydrogen count.
pub fn to_smiles(mol: &Molecule) -> String {
    let n = mol.atom_count();
    let mut out = String::new();
    let mut visited = vec![false; n];
    let mut ring_open: HashMap<usize, u32> = HashMap::new(); // bond index -> ring number
    let mut free_rings: Vec<u32> = Vec::new();
    let mut next_ring = 1u32;

    // DFS tree first, so ring-closure bonds are known before writing.
    let mut parent_bond = vec![usize::MAX; n];
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut closures: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut tree_bond = vec![false; mol.bonds.len()];
    let mut roots = Vec::new();
    for root in 0..n {
        if visited[root] {
            continue;
        }
        roots.push(root);
        let mut stack = vec![root];
        visited[root] = true;
        while let Some(v) = stack.pop() {
            let mut next = Vec::new();
            for &bi in mol.bonds_of(v) {
                let w = mol.bonds[bi].other(v);
                if !visited[w] {
                    visited[w] = true;
                    parent_bond[w] = bi;
                    tree_bond[bi] = true;
                    children[v].push((w, bi));
                    next.push(w);
                }
            }
            for w in next.into_iter().rev() {
                stack.push(w);
            }
        }
    }
    for (bi, bond) in mol.bonds.iter().enumerate() {
        if !tree_bond[bi] {
            closures[bond.a].push(bi);
            closures[bond.b].push(bi);
        }
    }

    fn bond_text(mol: &Molecule, bi: usize) -> &'static str {
        let b = &mol.bonds[bi];
        let both_aromatic = mol.atoms[b.a].aromatic && mol.atoms[b.b].aromatic;
        match (b.order, both_aromatic) {
            (BondOrder::Aromatic, true) | (BondOrder::Single, false) => "",
            (o, _) => o.symbol(),
        }
    }

    fn write_atom(mol: &Molecule, i: usize, out: &mut String) {
        let atom = &mol.atoms[i];
        let sym = if atom.aromatic {
            atom.element.symbol().to_ascii_lowercase()
        } else {
            atom.element.symbol().to_string()
        };
        let used: u8 = mol.neighbors(i).map(|(_, o)| o.valence()).sum();
        let implied = implied_hydrogens(atom.element, atom.aromatic, used);
        let bare = atom.formal_charge == 0 && implied == Some(atom.total_h_count());
        if bare {
            out.push_str(&sym);
            return;
        }
        out.push('[');
        out.push_str(&sym);
        match atom.total_h_count() {
            0 => {}
            1 => out.push('H'),
            h => {
                out.push('H');
                out.push_str(&h.to_string());
            }
        }
        match atom.formal_charge {
            0 => {}
            c if c > 0 => {
                out.push('+');
                if c > 1 {
                    out.push_str(&c.to_string());
                }
            }
            c => {
                out.push('-');
                if c < -1 {
                    out.push_str(&(-c).to_string());
                }
            }
        }
        out.push(']');
    }

    fn ring_label(num: u32) -> String {
        if num < 10 {
            num.to_string()
        } else {
            format!("%{num:02}")
        }
    }

    // Iterative emission: (atom, child cursor)
    for (ri, &root) in roots.iter().enumerate() {
        if ri > 0 {
            out.push('.');
        }
        enum Step {
            Enter(usize),
            Text(&'static str),
        }
        let mut stack = vec![Step::Enter(root)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Text(t) => out.push_str(t),
                Step::Enter(v) => {
                    if parent_bond[v] != usize::MAX {
                        out.push_str(bond_text(mol, parent_bond[v]));
                    }
                    write_atom(mol, v, &mut out);
                    for &bi in &closures[v] {
                        if let Some(num) = ring_open.remove(&bi) {
                            out.push_str(bond_text(mol, bi));
                            out.push_str(&ring_label(num));
                            free_rings.push(num);
                        } else {
                            let num = if let Some(pos) =
                                free_rings.iter().enumerate().min_by_key(|(_, &r)| r).map(|(p, _)| p)
                            {
                                free_rings.swap_remove(pos)
                            } else {
                                next_ring += 1;
                                next_ring - 1
                            };
                            ring_open.insert(bi, num);
                            out.push_str(&ring_label(num));
                        }
                    }
                    let kids = &children[v];
                    // last child continues the chain; earlier ones are branches
                    for (k, &(w, _)) in kids.iter().enumerate().rev() {
                        if k + 1 == kids.len() {
                            stack.push(Step::Enter(w));
                        } else {
                            stack.push(Step::Text(")"));
                            stack.push(Step::Enter(w));
                            stack.push(Step::Text("("));
                        }
                    }
                }
            }
        }
    }
    out
}
