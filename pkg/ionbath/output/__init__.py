from .frames import ResetRow, ResultRow, OttoRow, rows_frame, write_frame
from .summary import RunSummary, summary_path, write_summary
