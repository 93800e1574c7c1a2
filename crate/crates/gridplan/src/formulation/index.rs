//! Column layout of the planning LP: contiguous hour-blocks per variable
//! family, deterministically ordered by entity id.

use crate::model::{ReserveProduct, StorageKind, SystemModel, RESERVE_PRODUCTS};
use crate::real::Real;

/// Which unit collection a candidate investment variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitClass {
    Thermal,
    Storage,
    Renewable,
}

/// One candidate investment variable: the unit it scales and its column.
#[derive(Debug, Clone, Copy)]
pub struct Candidate {
    pub class: UnitClass,
    /// Position in the corresponding `*_order` list.
    pub order_pos: usize,
    pub col: usize,
}

/// Maps every decision variable to its column. All `*_order` vectors hold
/// indices into the system's collections, sorted by entity id; accessor
/// methods take positions in those orders.
#[derive(Debug, Clone)]
pub struct VariableIndex {
    pub horizon: usize,
    pub thermal_order: Vec<usize>,
    pub storage_order: Vec<usize>,
    pub renewable_order: Vec<usize>,
    pub node_order: Vec<usize>,
    pub line_order: Vec<usize>,

    thermal_p_base: usize,
    storage_discharge_base: usize,
    storage_charge_base: usize,
    storage_soc_base: usize,
    /// Spill column block per storage position (dams only).
    spill_base: Vec<Option<usize>>,
    renewable_p_base: usize,
    pub candidates: Vec<Candidate>,
    thermal_u: Vec<Option<usize>>,
    storage_u: Vec<Option<usize>>,
    renewable_u: Vec<Option<usize>>,
    shed_base: usize,
    emob_up_base: usize,
    emob_down_base: usize,
    other_up_base: usize,
    other_down_base: usize,
    /// Reserve column block per product and unit position; None when the
    /// unit is ineligible or the product carries no requirement.
    thermal_reserve: [Vec<Option<usize>>; 4],
    storage_reserve: [Vec<Option<usize>>; 4],
    /// Products with any strictly positive requirement hour.
    pub active_products: Vec<ReserveProduct>,
    theta_base: usize,
    pub num_cols: usize,
}

fn sorted_by_id<T>(items: &[T], id: impl Fn(&T) -> &str) -> Vec<usize> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| id(&items[a]).cmp(id(&items[b])));
    order
}

impl VariableIndex {
    pub fn new<S: Real>(system: &SystemModel<S>) -> Self {
        let horizon = system.horizon;
        let thermal_order = sorted_by_id(&system.thermal_units, |u| &u.id);
        let storage_order = sorted_by_id(&system.storage_units, |u| &u.id);
        let renewable_order = sorted_by_id(&system.renewable_units, |u| &u.id);
        let node_order = sorted_by_id(&system.nodes, |n| &n.id);
        let line_order = sorted_by_id(&system.lines, |l| &l.id);

        let active_products: Vec<ReserveProduct> = RESERVE_PRODUCTS
            .into_iter()
            .filter(|&p| {
                system
                    .reserve
                    .requirement(p)
                    .iter()
                    .any(|&v| v > S::zero())
            })
            .collect();

        let mut next = 0usize;
        let mut block = |count: usize| {
            let base = next;
            next += count;
            base
        };

        let thermal_p_base = block(thermal_order.len() * horizon);
        let storage_discharge_base = block(storage_order.len() * horizon);
        let storage_charge_base = block(storage_order.len() * horizon);
        let storage_soc_base = block(storage_order.len() * horizon);

        let mut spill_base = vec![None; storage_order.len()];
        for (ko, &k) in storage_order.iter().enumerate() {
            if system.storage_units[k].kind == StorageKind::Dam {
                spill_base[ko] = Some(block(horizon));
            }
        }

        let renewable_p_base = block(renewable_order.len() * horizon);

        let mut candidates = Vec::new();
        let mut thermal_u = vec![None; thermal_order.len()];
        for (jo, &j) in thermal_order.iter().enumerate() {
            if system.thermal_units[j].is_candidate {
                let col = block(1);
                thermal_u[jo] = Some(col);
                candidates.push(Candidate {
                    class: UnitClass::Thermal,
                    order_pos: jo,
                    col,
                });
            }
        }
        let mut storage_u = vec![None; storage_order.len()];
        for (ko, &k) in storage_order.iter().enumerate() {
            if system.storage_units[k].is_candidate {
                let col = block(1);
                storage_u[ko] = Some(col);
                candidates.push(Candidate {
                    class: UnitClass::Storage,
                    order_pos: ko,
                    col,
                });
            }
        }
        let mut renewable_u = vec![None; renewable_order.len()];
        for (ro, &r) in renewable_order.iter().enumerate() {
            if system.renewable_units[r].is_candidate {
                let col = block(1);
                renewable_u[ro] = Some(col);
                candidates.push(Candidate {
                    class: UnitClass::Renewable,
                    order_pos: ro,
                    col,
                });
            }
        }

        let shed_base = block(node_order.len() * horizon);
        let emob_up_base = block(node_order.len() * horizon);
        let emob_down_base = block(node_order.len() * horizon);
        let other_up_base = block(node_order.len() * horizon);
        let other_down_base = block(node_order.len() * horizon);

        let mut thermal_reserve: [Vec<Option<usize>>; 4] =
            std::array::from_fn(|_| vec![None; thermal_order.len()]);
        let mut storage_reserve: [Vec<Option<usize>>; 4] =
            std::array::from_fn(|_| vec![None; storage_order.len()]);
        for (pi, product) in RESERVE_PRODUCTS.into_iter().enumerate() {
            if !active_products.contains(&product) {
                continue;
            }
            for (jo, &j) in thermal_order.iter().enumerate() {
                if system.thermal_units[j].reserve_eligible.has(product) {
                    thermal_reserve[pi][jo] = Some(block(horizon));
                }
            }
            for (ko, &k) in storage_order.iter().enumerate() {
                if system.storage_units[k].reserve_eligible.has(product) {
                    storage_reserve[pi][ko] = Some(block(horizon));
                }
            }
        }

        let theta_base = block(node_order.len() * horizon);

        Self {
            horizon,
            thermal_order,
            storage_order,
            renewable_order,
            node_order,
            line_order,
            thermal_p_base,
            storage_discharge_base,
            storage_charge_base,
            storage_soc_base,
            spill_base,
            renewable_p_base,
            candidates,
            thermal_u,
            storage_u,
            renewable_u,
            shed_base,
            emob_up_base,
            emob_down_base,
            other_up_base,
            other_down_base,
            thermal_reserve,
            storage_reserve,
            active_products,
            theta_base,
            num_cols: next,
        }
    }

    pub fn thermal_p(&self, jo: usize, t: usize) -> usize {
        self.thermal_p_base + jo * self.horizon + t
    }

    pub fn storage_discharge(&self, ko: usize, t: usize) -> usize {
        self.storage_discharge_base + ko * self.horizon + t
    }

    pub fn storage_charge(&self, ko: usize, t: usize) -> usize {
        self.storage_charge_base + ko * self.horizon + t
    }

    pub fn storage_soc(&self, ko: usize, t: usize) -> usize {
        self.storage_soc_base + ko * self.horizon + t
    }

    pub fn spill(&self, ko: usize, t: usize) -> Option<usize> {
        self.spill_base[ko].map(|base| base + t)
    }

    pub fn renewable_p(&self, ro: usize, t: usize) -> usize {
        self.renewable_p_base + ro * self.horizon + t
    }

    pub fn thermal_invest(&self, jo: usize) -> Option<usize> {
        self.thermal_u[jo]
    }

    pub fn storage_invest(&self, ko: usize) -> Option<usize> {
        self.storage_u[ko]
    }

    pub fn renewable_invest(&self, ro: usize) -> Option<usize> {
        self.renewable_u[ro]
    }

    pub fn shed(&self, no: usize, t: usize) -> usize {
        self.shed_base + no * self.horizon + t
    }

    pub fn emob_up(&self, no: usize, t: usize) -> usize {
        self.emob_up_base + no * self.horizon + t
    }

    pub fn emob_down(&self, no: usize, t: usize) -> usize {
        self.emob_down_base + no * self.horizon + t
    }

    pub fn other_up(&self, no: usize, t: usize) -> usize {
        self.other_up_base + no * self.horizon + t
    }

    pub fn other_down(&self, no: usize, t: usize) -> usize {
        self.other_down_base + no * self.horizon + t
    }

    pub fn thermal_reserve(&self, product: ReserveProduct, jo: usize, t: usize) -> Option<usize> {
        self.thermal_reserve[product_slot(product)][jo].map(|base| base + t)
    }

    pub fn storage_reserve(&self, product: ReserveProduct, ko: usize, t: usize) -> Option<usize> {
        self.storage_reserve[product_slot(product)][ko].map(|base| base + t)
    }

    pub fn theta(&self, no: usize, t: usize) -> usize {
        self.theta_base + no * self.horizon + t
    }

    /// 24-hour day blocks from hour zero; the last block may be shorter.
    pub fn day_blocks(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        (0..self.horizon.div_ceil(24)).map(|d| {
            let start = d * 24;
            start..((start + 24).min(self.horizon))
        })
    }
}

fn product_slot(product: ReserveProduct) -> usize {
    RESERVE_PRODUCTS
        .iter()
        .position(|&p| p == product)
        .expect("known product")
}
