//! Child-process execution with wall-clock, output and resource ceilings.
//!
//! Every run happens in its own scratch directory. On Linux the child gets
//! its own process group, rlimits on address space, CPU time, file size,
//! core dumps and process count, and (best effort) a fresh network
//! namespace with no interfaces. When the service runs as root the child
//! also drops to an unprivileged uid, so it cannot write outside the
//! world-writable work directory it is started in.

use std::io::Read;
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::process::{Child, Command, ExitStatus, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Duration, Instant};

/// Diagnostics kept from compiler output or a crashed run.
pub const DIAGNOSTIC_BYTES: usize = 8 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChildLimits {
    pub memory_bytes: Option<u64>,
    pub cpu_seconds: Option<u64>,
    pub file_size_bytes: Option<u64>,
    pub max_processes: Option<u64>,
    pub isolate_network: bool,
    /// uid/gid to switch to before exec (only honoured when running as root).
    pub run_as: Option<(u32, u32)>,
}

impl ChildLimits {
    pub const NONE: ChildLimits = ChildLimits {
        memory_bytes: None,
        cpu_seconds: None,
        file_size_bytes: None,
        max_processes: None,
        isolate_network: false,
        run_as: None,
    };
}

#[derive(Debug)]
pub struct RawRun {
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub status: Option<ExitStatus>,
    pub timed_out: bool,
    /// stdout exceeded its cap; the child was killed.
    pub truncated: bool,
    pub elapsed: Duration,
}

impl RawRun {
    pub fn signal(&self) -> Option<i32> {
        self.status.and_then(|s| s.signal())
    }

    pub fn exit_code(&self) -> Option<i32> {
        self.status.and_then(|s| s.code())
    }
}

pub fn signal_name(sig: i32) -> &'static str {
    match sig {
        libc::SIGSEGV => "SIGSEGV",
        libc::SIGABRT => "SIGABRT",
        libc::SIGFPE => "SIGFPE",
        libc::SIGBUS => "SIGBUS",
        libc::SIGILL => "SIGILL",
        libc::SIGKILL => "SIGKILL",
        libc::SIGXCPU => "SIGXCPU",
        libc::SIGXFSZ => "SIGXFSZ",
        libc::SIGTERM => "SIGTERM",
        libc::SIGPIPE => "SIGPIPE",
        libc::SIGTRAP => "SIGTRAP",
        _ => "signal",
    }
}

fn set_limit(resource: libc::__rlimit_resource_t, value: u64) {
    let lim = libc::rlimit {
        rlim_cur: value as libc::rlim_t,
        rlim_max: value as libc::rlim_t,
    };
    // SAFETY: setrlimit is async-signal-safe and `lim` is a valid pointer.
    unsafe {
        libc::setrlimit(resource, &lim);
    }
}

fn apply_limits(cmd: &mut Command, limits: ChildLimits) {
    // SAFETY: the closure only calls async-signal-safe libc functions and
    // does not allocate.
    unsafe {
        cmd.pre_exec(move || {
            libc::setpgid(0, 0);
            set_limit(libc::RLIMIT_CORE, 0);
            if let Some(m) = limits.memory_bytes {
                set_limit(libc::RLIMIT_AS, m);
            }
            if let Some(c) = limits.cpu_seconds {
                set_limit(libc::RLIMIT_CPU, c);
            }
            if let Some(f) = limits.file_size_bytes {
                set_limit(libc::RLIMIT_FSIZE, f);
            }
            if let Some(p) = limits.max_processes {
                set_limit(libc::RLIMIT_NPROC, p);
            }
            if limits.isolate_network && libc::unshare(libc::CLONE_NEWNET) != 0 && libc::geteuid() != 0 {
                libc::unshare(libc::CLONE_NEWUSER | libc::CLONE_NEWNET);
            }
            if let Some((uid, gid)) = limits.run_as {
                if libc::geteuid() == 0
                    && (libc::setgroups(0, std::ptr::null()) != 0
                        || libc::setgid(gid) != 0
                        || libc::setuid(uid) != 0)
                {
                    return Err(std::io::Error::last_os_error());
                }
            }
            Ok(())
        });
    }
}

enum Pipe {
    Out,
    Err,
}

fn spawn_reader<R: Read + Send + 'static>(
    mut src: R,
    cap: usize,
    overflow: Option<Arc<AtomicBool>>,
    tag: Pipe,
    tx: mpsc::Sender<(Pipe, Vec<u8>)>,
) {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let mut chunk = [0u8; 8192];
        loop {
            match src.read(&mut chunk) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    let room = cap.saturating_sub(buf.len());
                    buf.extend_from_slice(&chunk[..n.min(room)]);
                    if n > room {
                        if let Some(flag) = &overflow {
                            flag.store(true, Ordering::SeqCst);
                            break;
                        }
                    }
                }
            }
        }
        let _ = tx.send((tag, buf));
    });
}

fn kill_group(child: &Child) {
    let pid = child.id() as libc::pid_t;
    // SAFETY: signalling our own child's process group.
    unsafe {
        libc::killpg(pid, libc::SIGKILL);
    }
}

/// Runs `cmd` to completion or until a ceiling trips. stdout beyond
/// `stdout_cap` kills the child and marks the run truncated; stderr is kept
/// up to [`DIAGNOSTIC_BYTES`].
pub fn run_limited(
    mut cmd: Command,
    wall: Duration,
    stdout_cap: usize,
    limits: ChildLimits,
) -> std::io::Result<RawRun> {
    cmd.stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    apply_limits(&mut cmd, limits);
    let start = Instant::now();
    let mut child = cmd.spawn()?;
    let overflow = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel();
    spawn_reader(
        child.stdout.take().expect("stdout piped"),
        stdout_cap,
        Some(overflow.clone()),
        Pipe::Out,
        tx.clone(),
    );
    spawn_reader(
        child.stderr.take().expect("stderr piped"),
        DIAGNOSTIC_BYTES,
        None,
        Pipe::Err,
        tx,
    );

    let deadline = start + wall;
    let mut timed_out = false;
    let mut truncated = false;
    let mut poll = Duration::from_micros(200);
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break Some(status);
        }
        if overflow.load(Ordering::SeqCst) {
            truncated = true;
            kill_group(&child);
            break Some(child.wait()?);
        }
        if Instant::now() >= deadline {
            timed_out = true;
            kill_group(&child);
            break Some(child.wait()?);
        }
        thread::sleep(poll);
        poll = (poll * 2).min(Duration::from_millis(5));
    };
    let elapsed = start.elapsed();
    // reap anything the child forked that still holds the pipes
    kill_group(&child);

    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    for _ in 0..2 {
        match rx.recv_timeout(Duration::from_secs(2)) {
            Ok((Pipe::Out, b)) => stdout = b,
            Ok((Pipe::Err, b)) => stderr = b,
            Err(_) => break,
        }
    }
    if overflow.load(Ordering::SeqCst) {
        truncated = true;
    }
    Ok(RawRun {
        stdout,
        stderr,
        status,
        timed_out,
        truncated,
        elapsed,
    })
}
