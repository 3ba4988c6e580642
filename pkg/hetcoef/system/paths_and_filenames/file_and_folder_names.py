import logging

logger = logging.getLogger(__name__)

# directory names
BASE_HETCOEF_DATA_FOLDER_NAME = "hetcoef_data"
LOG_FILE_FOLDER_NAME = "logs"

# environment variables
HETCOEF_THREADS_ENV_VAR = "HETCOEF_THREADS"
HETCOEF_LOG_FOLDER_ENV_VAR = "HETCOEF_LOG_FOLDER"

# json documents
SCHEMA_VERSION = 1

# file names / suffixes
GROUND_TRUTH_JSON_SUFFIX = "_ground_truth.json"
ASF_GRID_CSV_FILE_NAME = "asf_grid.csv"
EIGENVALUE_PROFILE_CSV_FILE_NAME = "eigenvalue_profile.csv"

# dataset csv columns
OUTCOME_COLUMN_NAME = "y"
TREATMENT_COLUMN_NAME = "x"
INSTRUMENT_COLUMN_NAME = "z"
CONTROL_COLUMN_NAME = "v"

# progress bars
MONTE_CARLO_PROGRESS_BAR_STRING = "Monte Carlo replications"
