use serde::{Deserialize, Serialize};

/// Elements accepted by the parser.
///
/// The organic subset may be written without brackets. The remaining entries
/// are only valid inside bracket atoms. Transition metals and other elements
/// outside this table are rejected, so compounds containing them are counted
/// as featurization failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    H,
    Li,
    B,
    C,
    N,
    O,
    F,
    Na,
    Mg,
    Al,
    Si,
    P,
    S,
    Cl,
    K,
    Ca,
    Ge,
    As,
    Se,
    Br,
    Te,
    I,
}

impl Element {
    const ALL: [Element; 22] = [
        Element::H,
        Element::Li,
        Element::B,
        Element::C,
        Element::N,
        Element::O,
        Element::F,
        Element::Na,
        Element::Mg,
        Element::Al,
        Element::Si,
        Element::P,
        Element::S,
        Element::Cl,
        Element::K,
        Element::Ca,
        Element::Ge,
        Element::As,
        Element::Se,
        Element::Br,
        Element::Te,
        Element::I,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Element::H => "H",
            Element::Li => "Li",
            Element::B => "B",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::F => "F",
            Element::Na => "Na",
            Element::Mg => "Mg",
            Element::Al => "Al",
            Element::Si => "Si",
            Element::P => "P",
            Element::S => "S",
            Element::Cl => "Cl",
            Element::K => "K",
            Element::Ca => "Ca",
            Element::Ge => "Ge",
            Element::As => "As",
            Element::Se => "Se",
            Element::Br => "Br",
            Element::Te => "Te",
            Element::I => "I",
        }
    }

    pub fn atomic_number(self) -> u8 {
        match self {
            Element::H => 1,
            Element::Li => 3,
            Element::B => 5,
            Element::C => 6,
            Element::N => 7,
            Element::O => 8,
            Element::F => 9,
            Element::Na => 11,
            Element::Mg => 12,
            Element::Al => 13,
            Element::Si => 14,
            Element::P => 15,
            Element::S => 16,
            Element::Cl => 17,
            Element::K => 19,
            Element::Ca => 20,
            Element::Ge => 32,
            Element::As => 33,
            Element::Se => 34,
            Element::Br => 35,
            Element::Te => 52,
            Element::I => 53,
        }
    }

    pub fn from_symbol(sym: &str) -> Option<Element> {
        Self::ALL.iter().copied().find(|e| e.symbol() == sym)
    }

    /// Standard valences for the organic subset, lowest first.
    pub fn default_valences(self) -> Option<&'static [u8]> {
        match self {
            Element::B => Some(&[3]),
            Element::C => Some(&[4]),
            Element::N => Some(&[3, 5]),
            Element::O => Some(&[2]),
            Element::P => Some(&[3, 5]),
            Element::S => Some(&[2, 4, 6]),
            Element::F | Element::Cl | Element::Br | Element::I => Some(&[1]),
            _ => None,
        }
    }

    pub fn is_organic_subset(self) -> bool {
        self.default_valences().is_some()
    }

    /// Whether a lowercase (aromatic) spelling exists for this element.
    pub fn can_be_aromatic(self) -> bool {
        matches!(
            self,
            Element::B
                | Element::C
                | Element::N
                | Element::O
                | Element::P
                | Element::S
                | Element::Se
                | Element::As
                | Element::Te
        )
    }
}

impl std::fmt::Display for Element {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.symbol())
    }
}
