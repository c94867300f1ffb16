import sys

from fraclap.cli import main

sys.exit(main())
