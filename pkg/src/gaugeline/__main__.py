import sys

from gaugeline.cli import main

sys.exit(main())
