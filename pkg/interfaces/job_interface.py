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

from multiprocessing import Process
from queue import Empty

import traceback


class JobFailure(object):
    """Stands in for the output of a job that raised, so the parent can re-raise."""

    def __init__(self, worker, trace):
        self.worker = worker
        self.trace = trace


class JobInterface(Process):
    """Worker process: pulls its block of jobs, runs the target on each, and
    posts {job: output} to its result queue."""

    def __init__(self, t_id, q, result_q, num_jobs, rtarg, shared_kwargs=None):
        super().__init__()
        self.workQ = q
        self.resultQ = result_q
        self._njobs = num_jobs
        self.target_fn = rtarg
        self.shared_kwargs = dict(shared_kwargs or {})
        self.tid = t_id

    def run(self):
        jobs = []
        while len(jobs) < self._njobs:
            try:
                jobs.append(self.workQ.get(True, 10))
            except Empty:
                print("Could not get a job from workQ for 10 seconds, smth is wrong...")
                return

        for job_id in jobs:
            try:
                output = self.target_fn(job_id, **self.shared_kwargs)
            except Exception:
                output = JobFailure(self.tid, traceback.format_exc())
            self.workQ.task_done()
            self.resultQ.put_nowait({job_id: output})
