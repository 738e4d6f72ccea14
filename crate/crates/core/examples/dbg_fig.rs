use std::time::Duration;
use playgol_core::engine::{solve, SolveConfig};
use playgol_core::robot::{self, RobotState};
use playgol_core::logic::render_program;

fn main() {
    let rs = |rx, ry, bx, by, h| RobotState::new((rx, ry), (bx, by), h, 5).unwrap();
    let bk = robot::registry();
    let task = robot::instance_task("f", rs(2,1,2,1,false), rs(4,3,4,3,false));
    let cfg = SolveConfig::new(&robot::METARULES, 5, Duration::from_secs(60));
    let outcome = solve(&task, &bk, &cfg).unwrap();
    let p = outcome.solution().unwrap();
    println!("raw:\n{}", render_program(p).unwrap());
    println!("unfolded:\n{}", render_program(&p.unfolded()).unwrap());
    println!("steps: {} clauses_tried: {} elapsed: {:?}", outcome.stats.steps, outcome.stats.clauses_tried, outcome.stats.elapsed);
}
