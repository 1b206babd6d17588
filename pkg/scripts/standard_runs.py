import os
import sys

from inlslab.cli import main

CONFIGS = ('standard_d1.cfg', 'standard_d2.cfg', 'standard_d3.cfg', 'free_d1.cfg')

if __name__ == '__main__':
    here = os.path.dirname(os.path.abspath(__file__))
    configs = [os.path.join(here, name) for name in CONFIGS]
    code = main(['sweep'] + configs + ['--output-dir', 'standard'])
    for name in CONFIGS:
        run_dir = os.path.join('standard', os.path.splitext(name)[0])
        for command in ('verify', 'plot', 'scatter'):
            status = main([command, run_dir])
            print("{} {}: exit {}".format(command, run_dir, status))
            code = code or status
    sys.exit(code)
