//! Forward simulation and extremal first-passage queries for one vehicle.

use sentinel::dynamics::{
    crossing_times, max_time_to, min_time_to, position_after, step, PiecewiseConstantInput,
    VehicleSpec, VehicleState, advance,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // a = 1, b = 0.005, u in [-2, 2], v in [8, 10]
    let spec = VehicleSpec::new(0, 1.0, 0.005, -2.0, 2.0, 8.0, 10.0)?;
    let start = VehicleState::new(0.0, 8.0);

    let s = step(start, &spec, 2.0, 0.5)?;
    println!("after 0.5 s at u = 2: x = {:.9}, v = {:.9}", s.pos, s.speed);

    let s = step(start, &spec, 2.0, 5.0)?;
    println!("after 5 s at u = 2 the speed saturates: v = {:.9}", s.speed);

    println!("earliest arrival at 20 m: {:.9} s", min_time_to(start, &spec, 20.0)?);
    println!("latest arrival at 20 m:   {:.9} s", max_time_to(start, &spec, 20.0)?);

    let times = crossing_times(start, &spec, 2.0, &[20.0, 25.0, 26.0, 31.0])?;
    println!("full-throttle crossings of [20, 25] and [26, 31]: {times:.4?}");
    println!("position after 1 s braking: {:.9}", position_after(start, &spec, -2.0, 1.0)?);

    let brake_then_go = PiecewiseConstantInput::two_phase(-2.0, 0.7, 2.0);
    let s = advance(VehicleState::new(0.0, 10.0), &spec, &brake_then_go, 2.0)?;
    println!("brake 0.7 s then accelerate, after 2 s: x = {:.6}, v = {:.6}", s.pos, s.speed);
    Ok(())
}
