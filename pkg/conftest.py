import os


def pytest_addoption(parser):
    parser.addoption("--budget", action="store", type=int, default=int(os.getenv("ITEST_BUDGET", "50")),
                     help="Iterations per search in the acceptance runs.")
    parser.addoption("--seeds", action="store", type=int, default=int(os.getenv("ITEST_SEEDS", "20")),
                     help="Number of paired seeds in the tuner acceptance runs.")
    parser.addoption("--tasks-dir", action="store", default=os.getenv("ITEST_TASKS_DIR", ""),
                     help="Directory of task folders; the bundled tasks are generated when empty.")


def pytest_generate_tests(metafunc):
    # This is called for every test. Only get/set command line arguments
    # if the argument is specified in the list of test "fixturenames".
    if 'budget' in metafunc.fixturenames:
        metafunc.parametrize("budget", [metafunc.config.option.budget])
    if 'seeds' in metafunc.fixturenames:
        metafunc.parametrize("seeds", [metafunc.config.option.seeds])
    if 'tasks_dir' in metafunc.fixturenames:
        metafunc.parametrize("tasks_dir", [metafunc.config.option.tasks_dir])
