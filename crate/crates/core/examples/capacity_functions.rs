//! Capacity of machines with shared intervals, and how long work takes.

use streamsched::capacity::{MachinePark, MachineTimeline};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // half speed until t=2, full speed until 4, then free
    let busy = MachineTimeline::from_pairs(0, &[(2.0, 0.5), (4.0, 1.0)])?;
    let slow = MachineTimeline::from_pairs(1, &[(6.0, 0.25)])?;
    let park = MachinePark::new(vec![busy, slow], 1, 0.5)?;

    for t in [0.0, 1.0, 2.0, 3.0, 6.0, 8.0] {
        println!(
            "t = {t:>4}: A_0 = {:>5}, A_1 = {:>5}, A = {:>5}",
            park.machine(0).capacity_at(t)?,
            park.machine(1).capacity_at(t)?,
            park.capacity_at(t)?
        );
    }
    for (start, amount) in [(0.0, 1.0), (0.0, 3.0), (1.0, 2.5)] {
        let done = park.machine(0).completion_time(start, amount)?;
        println!("machine 0: {amount} units from t = {start} finish at {done}");
    }
    let (lb, ub) = park.search_bounds(10.0);
    println!("P = 10: optimum lies in [{lb}, {ub}]");
    Ok(())
}
