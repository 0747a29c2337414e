#!/usr/bin/env python
# MIT License

# Copyright (c) 2024, the stabsel contributors

# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

from multiprocessing import Queue, JoinableQueue, active_children
from math import floor

from interfaces.job_interface import JobInterface, JobFailure


class Invoker(object):
    """Forks numProcs worker processes and hands each a contiguous block of jobs.

    Required kwargs:
        numProcs -> number of worker processes
        runnableTarg -> picklable callable, invoked as runnableTarg(job, **optargs)
        argrange -> iterable of job identifiers
    Optional:
        optargs -> dict of keyword arguments shared by every job
    """

    def __init__(self, **kwargs):
        if "numProcs" not in kwargs.keys():
            raise ValueError("numProcs argument not specified in Invoker")
        else:
            self.numProcs = int(kwargs["numProcs"])
        if "runnableTarg" not in kwargs.keys():
            raise ValueError("runnableTarg argument not specified in Invoker")
        else:
            self.runTarg = kwargs["runnableTarg"]
        if "argrange" not in kwargs.keys():
            raise ValueError("argrange argument not specified in Invoker")
        if self.numProcs < 1:
            raise ValueError("numProcs must be >= 1, got {}".format(self.numProcs))
        self.opt_args = kwargs.get("optargs") or {}

        argrange = list(kwargs["argrange"])
        # Never fork more workers than there are jobs.
        self.numProcs = max(1, min(self.numProcs, len(argrange)))

        self.input_queues = [JoinableQueue() for count in range(self.numProcs)]
        self.result_queues = [Queue() for count in range(self.numProcs)]

        # Divide up jobs into contiguous blocks, the first (numJobs % numProcs)
        # workers taking one extra job each.
        numJobs = len(argrange)
        jobsPerProc = floor(numJobs / self.numProcs)
        extraJobs = numJobs % self.numProcs
        self.jobs_assigned = [
            jobsPerProc + (1 if i < extraJobs else 0) for i in range(self.numProcs)
        ]
        start = 0
        for curProc in range(self.numProcs):
            for job in argrange[start : start + self.jobs_assigned[curProc]]:
                self.input_queues[curProc].put_nowait(job)
            start += self.jobs_assigned[curProc]

        self.processes = [
            JobInterface(
                count,
                self.input_queues[count],
                self.result_queues[count],
                self.jobs_assigned[count],
                self.runTarg,
                self.opt_args,
            )
            for count in range(self.numProcs)
        ]

    def getResultsFromQueue(self, index):
        resultCount = 0
        results = []
        while resultCount < self.jobs_assigned[index]:
            results.append(self.result_queues[index].get())
            resultCount += 1
        return results

    def startProcs(self):
        for p in self.processes:
            p.start()

    def joinProcs(self):
        for q in self.input_queues:
            q.join()

    def run(self):
        """Start all workers, wait for them, and return {job: output} over all jobs.

        Raises RuntimeError if any job raised inside its worker."""
        self.startProcs()
        self.joinProcs()
        merged = {}
        for idx in range(self.numProcs):
            for r in self.getResultsFromQueue(idx):
                merged.update(r)
        for p in self.processes:
            p.join()
        failures = {k: v for k, v in merged.items() if isinstance(v, JobFailure)}
        if failures:
            self.kill_active_procs()
            job, failure = sorted(failures.items(), key=lambda t: str(t[0]))[0]
            raise RuntimeError(
                "Job {} failed in worker {}:\n{}".format(job, failure.worker, failure.trace)
            )
        return merged

    def kill_active_procs(self, *args):
        """Terminate any worker that is still alive."""
        for p in active_children():
            p.terminate()
