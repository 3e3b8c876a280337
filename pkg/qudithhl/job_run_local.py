import os
from datetime import datetime
from multiprocessing import Manager, Pool


def execute_job(worker, job, run_flag):
    """Executes a single job unless the run flag has been lowered.

    Parameters
    ----------
    worker : callable
        Module-level function taking one job argument.
    job : object
        The job argument, must be picklable.
    run_flag : multiprocessing.Value or None
        Shared flag; when its value is 0 the job is skipped and None returned.

    Returns
    -------
    object
        The worker result, or None if the job was skipped or interrupted.
    """
    if run_flag is not None and run_flag.value == 0:
        print(f"Skipping job {job!r}...")
        return None
    try:
        return worker(job)
    except KeyboardInterrupt:
        print(f"KeyboardInterrupt detected, stopping job {job!r}...")
        return None


def job_executor(args):
    """Unpacks the arguments of ``execute_job`` for ``Pool.map_async``."""
    return execute_job(*args)


def job_run_local(worker, jobs, n_concurrent_jobs=None, verbose=True):
    """Runs independent jobs locally, in parallel when asked to.

    Parameters
    ----------
    worker : callable
        Module-level function applied to every job. Exceptions it does not
        handle propagate to the caller.
    jobs : list
        Job arguments.
    n_concurrent_jobs : int, optional
        Number of worker processes. 1 runs the jobs serially in this process.
        By default, it is set to the number of CPUs available.
    verbose : bool, optional
        Print start/finish times. Default True.

    Returns
    -------
    list
        One result per job, in job order. Jobs skipped after a
        KeyboardInterrupt give None.
    """
    jobs = list(jobs)
    if n_concurrent_jobs is None:
        n_concurrent_jobs = os.cpu_count()
    if n_concurrent_jobs < 1:
        raise ValueError(f"n_concurrent_jobs must be >= 1, got {n_concurrent_jobs}.")
    if not jobs:
        return []

    starting_time = datetime.now()
    if verbose:
        print(f"Running {len(jobs)} jobs...")
        print(f"Started running at {starting_time}...")

    if n_concurrent_jobs == 1 or len(jobs) == 1:
        results = []
        for job in jobs:
            try:
                results.append(worker(job))
            except KeyboardInterrupt:
                print("KeyboardInterrupt detected, skipping the remaining jobs...")
                results.extend([None] * (len(jobs) - len(results)))
                break
    else:
        manager = Manager()
        run_flag = manager.Value("i", 1)
        argument_list = [(worker, job, run_flag) for job in jobs]
        results = [None] * len(jobs)
        n_concurrent_jobs = min(n_concurrent_jobs, len(jobs))
        pool = Pool(n_concurrent_jobs)
        try:
            result = pool.map_async(job_executor, argument_list)
            pool.close()
            results = result.get()
        except KeyboardInterrupt:
            print(
                "KeyboardInterrupt detected, wait for running jobs to finish gracefully..."
            )
            run_flag.value = 0
            try:
                results = result.get()
                pool.join()
            except KeyboardInterrupt:
                print("Ok then, force stop the jobs...")
                pool.terminate()
                pool.join()
        except Exception as e:
            print("Unexpected error:", e)
            pool.terminate()
            raise e
        else:
            pool.join()

    if verbose:
        finishing_time = datetime.now()
        print(f"Finished running at {finishing_time}...")
        print(f"Total running time: {finishing_time - starting_time}...")
    return results
