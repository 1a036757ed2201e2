//! Reference networks shipped with the crate as JSON fixtures.
//!
//! Each fixture is stored under `fixtures/` in the network JSON schema and
//! carries the class and parameters it is known to satisfy.

use crate::network::{LayeredNetwork, NetworkClass, Ratio};

#[derive(Debug, Clone, Copy)]
pub struct Figure {
    pub name: &'static str,
    pub class: NetworkClass,
    pub depth: usize,
    pub size: usize,
    pub json: &'static str,
}

impl Figure {
    pub fn network(&self) -> LayeredNetwork {
        LayeredNetwork::from_json(self.json).expect("bundled fixture is a valid network")
    }

    pub fn n(&self) -> usize {
        self.network().n()
    }
}

fn quarter() -> Ratio {
    Ratio::new(1, 4).expect("non-zero denominator")
}

macro_rules! fixture {
    ($name:literal) => {
        include_str!(concat!("../fixtures/", $name, ".json"))
    };
}

/// Depth-3, 5-comparator sorting network on 4 channels.
pub fn sorting_4() -> Figure {
    Figure {
        name: "sorting_4",
        class: NetworkClass::Sorting,
        depth: 3,
        size: 5,
        json: fixture!("sorting_4"),
    }
}

/// Depth-4, 17-comparator 1/4-halver on 12 channels.
pub fn halver_12() -> Figure {
    Figure {
        name: "halver_12",
        class: NetworkClass::Halver { epsilon: quarter() },
        depth: 4,
        size: 17,
        json: fixture!("halver_12"),
    }
}

/// Depth-4, 36-comparator 1/4-halver on 18 channels, every comparator
/// crossing the two halves.
pub fn halver_18() -> Figure {
    Figure {
        name: "halver_18",
        class: NetworkClass::Halver { epsilon: quarter() },
        depth: 4,
        size: 36,
        json: fixture!("halver_18"),
    }
}

pub fn single_exception_6() -> Figure {
    single_exception()
        .into_iter()
        .find(|f| f.name == "single_exception_6")
        .expect("fixture present")
}

/// Single-exception networks of optimal depth and size for 3 to 10 channels.
/// Ten channels has two Pareto-optimal shapes.
pub fn single_exception() -> Vec<Figure> {
    let se = |name, depth, size, json| Figure {
        name,
        class: NetworkClass::SingleException,
        depth,
        size,
        json,
    };
    vec![
        se("single_exception_3", 2, 2, fixture!("single_exception_3")),
        se("single_exception_4", 3, 5, fixture!("single_exception_4")),
        se("single_exception_5", 4, 8, fixture!("single_exception_5")),
        se("single_exception_6", 5, 12, fixture!("single_exception_6")),
        se("single_exception_7", 6, 15, fixture!("single_exception_7")),
        se("single_exception_8", 6, 20, fixture!("single_exception_8")),
        se("single_exception_9", 7, 24, fixture!("single_exception_9")),
        se("single_exception_10_depth8", 8, 29, fixture!("single_exception_10_depth8")),
        se("single_exception_10_depth7", 7, 31, fixture!("single_exception_10_depth7")),
    ]
}

pub fn all() -> Vec<Figure> {
    let mut figs = vec![sorting_4(), halver_12(), halver_18()];
    figs.extend(single_exception());
    figs
}

pub fn by_name(name: &str) -> Option<Figure> {
    all().into_iter().find(|f| f.name == name)
}
