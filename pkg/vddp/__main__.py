import sys

from vddp.cli import main

sys.exit(main())
