import sys

from mmhar.cli import main

sys.exit(main())
