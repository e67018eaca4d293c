"""Sub-task alphabet shared across policies, data and execution.

The four driveable sub-tasks index the low-level heads; the extended set
adds finish, the high-level signal that the whole instruction is done.
"""

SUBTASKS = ("lanefollow", "left", "right", "straight")
SUBTASKS_EXT = SUBTASKS + ("finish",)

SUBTASK_ID = {name: i for i, name in enumerate(SUBTASKS)}
SUBTASK_EXT_ID = {name: i for i, name in enumerate(SUBTASKS_EXT)}

FINISH = "finish"
LANEFOLLOW = "lanefollow"
