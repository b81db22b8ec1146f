//! A small FIFO counting semaphore.
//!
//! Both the gateway's in-flight cap and the harness worker bound use this:
//! callers past the bound block, and they are admitted in arrival order.

use std::collections::VecDeque;

use parking_lot::{Condvar, Mutex};

#[derive(Debug)]
struct State {
    in_use: usize,
    next_ticket: u64,
    queue: VecDeque<u64>,
}

#[derive(Debug)]
pub struct FifoSemaphore {
    capacity: usize,
    state: Mutex<State>,
    cv: Condvar,
}

/// Releases its slot on drop.
#[derive(Debug)]
pub struct Permit<'a> {
    sem: &'a FifoSemaphore,
}

impl FifoSemaphore {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            state: Mutex::new(State {
                in_use: 0,
                next_ticket: 0,
                queue: VecDeque::new(),
            }),
            cv: Condvar::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn in_use(&self) -> usize {
        self.state.lock().in_use
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut st = self.state.lock();
        let ticket = st.next_ticket;
        st.next_ticket += 1;
        st.queue.push_back(ticket);
        while !(st.queue.front() == Some(&ticket) && st.in_use < self.capacity) {
            self.cv.wait(&mut st);
        }
        st.queue.pop_front();
        st.in_use += 1;
        drop(st);
        // the next ticket may also fit
        self.cv.notify_all();
        Permit { sem: self }
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut st = self.sem.state.lock();
        st.in_use -= 1;
        drop(st);
        self.sem.cv.notify_all();
    }
}
