//! Small named instances used across tests, docs and the CLI smoke checks.
//!
//! Skills `s1, s2, s3` map to ids `0, 1, 2`; worker `wK` sits at position `K-1`
//! and carries the label `K`.

use crate::model::{ClassLabel::*, Instance, Task, Worker};

const NONE: [usize; 0] = [];

/// `w1(A,1,{s1,s2}) w2(A,1,{s3}) w3(B,5,{s1,s2,s3}) w4(B,0.2,{})`, task `{s1,s2,s3}`.
pub fn i4() -> (Instance, Task) {
    let workers = vec![
        Worker::new(1, 1.0, Class1, [0usize, 1]),
        Worker::new(2, 1.0, Class1, [2usize]),
        Worker::new(3, 5.0, Class2, [0usize, 1, 2]),
        Worker::new(4, 0.2, Class2, NONE),
    ];
    (Instance::new(3, workers).unwrap(), Task::new(0, [0usize, 1, 2]))
}

/// `w1(A,1,{s1,s2}) w2(A,1,{s2,s3}) w3(B,2.5,{s1,s2,s3}) w4(B,0.5,{s3})`, task `{s1,s2,s3}`.
pub fn i3() -> (Instance, Task) {
    let workers = vec![
        Worker::new(1, 1.0, Class1, [0usize, 1]),
        Worker::new(2, 1.0, Class1, [1usize, 2]),
        Worker::new(3, 2.5, Class2, [0usize, 1, 2]),
        Worker::new(4, 0.5, Class2, [2usize]),
    ];
    (Instance::new(3, workers).unwrap(), Task::new(0, [0usize, 1, 2]))
}

/// Both workers are mandatory: `w1(A,1,{s1}) w2(B,1,{s2})`, task `{s1,s2}`.
pub fn forced_pair() -> (Instance, Task) {
    let workers = vec![
        Worker::new(1, 1.0, Class1, [0usize]),
        Worker::new(2, 1.0, Class2, [1usize]),
    ];
    (Instance::new(2, workers).unwrap(), Task::new(0, [0usize, 1]))
}

/// `w1(A,1,{s1}) w2(B,3,{s1})`, task `{s1}`.
pub fn symmetric_pair() -> (Instance, Task) {
    let workers = vec![
        Worker::new(1, 1.0, Class1, [0usize]),
        Worker::new(2, 3.0, Class2, [0usize]),
    ];
    (Instance::new(1, workers).unwrap(), Task::new(0, [0usize]))
}
