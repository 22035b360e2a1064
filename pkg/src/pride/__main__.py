import sys

from pride.cli import main

sys.exit(main())
