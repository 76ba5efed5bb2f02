//! Reference domains shipped with the crate, used as benchmarks.

use crate::gen::{random_walk, Plan, ProblemInstance};
use crate::model::Domain;
use crate::pddl::{parse_domain, parse_plan, parse_problem, PddlError};
use crate::trace::Trace;

#[derive(Debug, Clone, Copy)]
pub struct Bundle {
    pub name: &'static str,
    pub domain: &'static str,
    pub problems: &'static [&'static str],
    /// Random walks per problem, with seeds `0..walks`.
    pub walks: u64,
    pub walk_length: usize,
}

pub const GRIPPER: Bundle = Bundle {
    name: "gripper",
    domain: include_str!("../benchmarks/gripper/domain.pddl"),
    problems: &[include_str!("../benchmarks/gripper/p01.pddl")],
    walks: 2,
    walk_length: 150,
};

pub const GRIPPER_PLAN: &str = include_str!("../benchmarks/gripper/p01.plan");

pub const TRANSPORT: Bundle = Bundle {
    name: "transport",
    domain: include_str!("../benchmarks/transport/domain.pddl"),
    problems: &[
        include_str!("../benchmarks/transport/p01.pddl"),
        include_str!("../benchmarks/transport/p02.pddl"),
    ],
    walks: 2,
    walk_length: 200,
};

pub const HANOI: Bundle = Bundle {
    name: "hanoi",
    domain: include_str!("../benchmarks/hanoi/domain.pddl"),
    problems: &[include_str!("../benchmarks/hanoi/p01.pddl")],
    walks: 2,
    walk_length: 150,
};

pub const VISITALL: Bundle = Bundle {
    name: "visitall",
    domain: include_str!("../benchmarks/visitall/domain.pddl"),
    problems: &[include_str!("../benchmarks/visitall/p01.pddl")],
    walks: 2,
    walk_length: 150,
};

pub const ALL: [Bundle; 4] = [GRIPPER, TRANSPORT, HANOI, VISITALL];

pub fn by_name(name: &str) -> Option<Bundle> {
    ALL.iter().copied().find(|b| b.name == name)
}

impl Bundle {
    pub fn parse_domain(&self) -> Result<Domain, PddlError> {
        parse_domain(self.domain)
    }

    pub fn parse_problems(&self, domain: &Domain) -> Result<Vec<ProblemInstance>, PddlError> {
        self.problems
            .iter()
            .map(|p| parse_problem(p, domain))
            .collect()
    }

    /// Seeded random-walk traces over every problem. Instance ids are made
    /// unique per walk.
    pub fn traces(&self) -> Result<(Domain, Vec<Trace>), PddlError> {
        let domain = self.parse_domain()?;
        let mut traces = Vec::new();
        for problem in self.parse_problems(&domain)? {
            for seed in 0..self.walks {
                let mut t = random_walk(&domain, &problem, self.walk_length, seed);
                t.instance_id = format!("{}-s{seed}", problem.name).as_str().into();
                traces.push(t);
            }
        }
        Ok((domain, traces))
    }
}

pub fn gripper_plan() -> Plan {
    parse_plan(GRIPPER_PLAN).expect("bundled plan parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::replay_plan;

    #[test]
    fn bundles_parse_and_walk() {
        for b in ALL {
            let (d, traces) = b.traces().unwrap();
            assert_eq!(d.header().actions.len(), 0);
            let steps: usize = traces.iter().map(|t| t.steps.len()).sum();
            assert!(steps >= 200, "{}: {steps} steps", b.name);
        }
    }

    #[test]
    fn bundled_plan_replays() {
        let d = GRIPPER.parse_domain().unwrap();
        let p = &GRIPPER.parse_problems(&d).unwrap()[0];
        let t = replay_plan(&d, p, &gripper_plan()).unwrap();
        assert_eq!(t.steps.len(), 5);
    }
}
