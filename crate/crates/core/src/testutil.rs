use crate::instance::{Hole, Instance, User};
use alloc::vec;

/// The four-hole, six-user instance used throughout the tests.
pub fn example1() -> Instance {
    let holes = vec![Hole { alpha: 5, beta: 10 }, Hole { alpha: 14, beta: 19 }, Hole { alpha: 21, beta: 25 }, Hole { alpha: 28, beta: 33 }];
    let users = vec![User::new(3, 5), User::new(12, 28), User::new(6, 11), User::new(4, 6), User::new(2, 4), User::new(9, 12)];
    Instance::new(holes, users, 1).unwrap()
}
