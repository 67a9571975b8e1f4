import sys

from vatsim.cli import main

sys.exit(main())
