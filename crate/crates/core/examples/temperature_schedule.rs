//! Prints the annealed temperature used at each training epoch.
//!
//! ```text
//! cargo run --example temperature_schedule -- [epochs] [eta] [gamma]
//! ```

use disentangle::snnl::{annealing_temperature, TemperatureSchedule};

fn main() -> disentangle::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs: usize = args.next().map_or(30, |s| s.parse().expect("epochs"));
    let default = TemperatureSchedule::default();
    let eta: f64 = args.next().map_or(default.eta, |s| s.parse().expect("eta"));
    let gamma: f64 = args.next().map_or(default.gamma, |s| s.parse().expect("gamma"));
    let schedule = TemperatureSchedule::new(eta, gamma)?;

    println!("epoch  temperature");
    for epoch in 0..epochs {
        println!("{epoch:>5}  {:.6}", annealing_temperature(epoch, &schedule));
    }
    Ok(())
}
